//! Runs the twelve acceptance criteria and prints one line per criterion.
//! `XDA_ACCEPT_ONLY=3,4` restricts the report.

use xda::acceptance::{run, Options};

fn main() {
    let mut opts = Options::all();
    if let Ok(only) = std::env::var("XDA_ACCEPT_ONLY") {
        opts.only = only.split(',').filter_map(|s| s.trim().parse().ok()).collect();
    }
    let outcomes = run(&opts);
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
