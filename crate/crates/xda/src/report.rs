//! Artifacts and their JSON and CSV forms.
//!
//! Every artifact is a summary object plus a table. Each table row carries
//! the module that produced it and a certificate: the JSON payload a reader
//! needs to re-check the row, identified by a hash of its canonical text.
//! CSV files start with one `#` line holding the reproducibility header.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use xda_core::{QuadScalar, RationalInterval};

use crate::config::{ExperimentConfig, Format};

/// Bumped whenever a table's columns change.
pub const SCHEMA_VERSION: u32 = 1;

pub const TOOL: &str = "xda";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status of a run that produced an artifact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A cap or budget ran out; the artifact holds what was found.
    Exhausted,
    /// A re-check failed. Always a bug.
    Invariant,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Exhausted => 3,
            Status::Invariant => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Exhausted => "exhausted",
            Status::Invariant => "invariant-violation",
        }
    }

    pub fn worst(self, other: Status) -> Status {
        if self.code() >= other.code() {
            self
        } else {
            other
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub module: &'static str,
    pub certificate: Value,
    pub cells: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(schema: &'static str, columns: &'static [&'static str]) -> Self {
        Table { schema, columns, rows: Vec::new() }
    }

    pub fn push(&mut self, module: &'static str, certificate: Value, cells: Vec<Value>) {
        assert_eq!(cells.len(), self.columns.len(), "row width for {}", self.schema);
        self.rows.push(Row { module, certificate, cells });
    }

    pub fn schema_tag(&self) -> String {
        format!("{}/{}", self.schema, SCHEMA_VERSION)
    }

    /// Column names as written to CSV, provenance last.
    pub fn csv_columns(&self) -> Vec<&'static str> {
        let mut cols = self.columns.to_vec();
        cols.extend(["module", "certificate"]);
        cols
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub status: Status,
    pub summary: Map<String, Value>,
    pub table: Table,
    pub notes: Vec<String>,
}

impl Artifact {
    pub fn new(table: Table) -> Self {
        Artifact { status: Status::Ok, summary: Map::new(), table, notes: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_string(), value);
    }

    pub fn degrade(&mut self, status: Status, note: impl Into<String>) {
        self.status = self.status.worst(status);
        self.notes.push(note.into());
    }
}

pub fn certificate_id(module: &str, certificate: &Value) -> String {
    let text = serde_json::to_string(certificate).expect("certificate serializes");
    let digest = Sha256::digest(text.as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("{module}:{hex}")
}

pub fn header(config: &ExperimentConfig, artifact: &Artifact) -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "command": config.command,
        "configHash": config.hash(),
        "seed": config.seed,
        "maxPrecision": config.max_precision,
        "schema": artifact.table.schema_tag(),
        "status": artifact.status.name(),
    })
}

pub fn render(config: &ExperimentConfig, artifact: &Artifact) -> String {
    match config.format {
        Format::Json => render_json(config, artifact),
        Format::Csv => render_csv(config, artifact),
    }
}

fn render_json(config: &ExperimentConfig, artifact: &Artifact) -> String {
    let rows: Vec<Value> = artifact
        .table
        .rows
        .iter()
        .map(|r| {
            let mut obj: Map<String, Value> =
                artifact.table.columns.iter().map(|c| c.to_string()).zip(r.cells.iter().cloned()).collect();
            obj.insert("module".into(), r.module.into());
            obj.insert("certificateId".into(), certificate_id(r.module, &r.certificate).into());
            obj.insert("certificate".into(), r.certificate.clone());
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "header": header(config, artifact),
        "result": artifact.summary,
        "rows": rows,
        "notes": artifact.notes,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("artifact serializes");
    s.push('\n');
    s
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render_csv(config: &ExperimentConfig, artifact: &Artifact) -> String {
    let mut out = format!(
        "# {} {} schema={} config={} seed={} max-precision={} status={}\n",
        TOOL,
        VERSION,
        artifact.table.schema_tag(),
        config.hash(),
        config.seed,
        config.max_precision,
        artifact.status.name()
    );
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(artifact.table.csv_columns()).expect("in-memory write");
    for r in &artifact.table.rows {
        let mut rec: Vec<String> = r.cells.iter().map(cell_text).collect();
        rec.push(r.module.to_string());
        rec.push(certificate_id(r.module, &r.certificate));
        w.write_record(&rec).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
    out
}

/// Splits a CSV artifact into its header line, column names and records.
pub fn parse_csv(text: &str) -> Option<(String, Vec<String>, Vec<Vec<String>>)> {
    let (first, rest) = text.split_once('\n')?;
    let header = first.strip_prefix("# ")?.to_string();
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
    let cols = r.headers().ok()?.iter().map(str::to_string).collect();
    let rows = r.records().map(|rec| rec.ok().map(|x| x.iter().map(str::to_string).collect())).collect::<Option<_>>()?;
    Some((header, cols, rows))
}

/// Integers as JSON numbers when they fit in 64 bits, strings otherwise.
pub fn int(n: &BigInt) -> Value {
    match (n.to_i64(), n.to_u64()) {
        (Some(v), _) => v.into(),
        (_, Some(v)) => v.into(),
        _ => n.to_string().into(),
    }
}

pub fn ints(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(int).collect())
}

/// Rationals as `"p/q"` strings.
pub fn rational(r: &BigRational) -> Value {
    r.to_string().into()
}

pub fn rationals(v: &[BigRational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn scalar(x: &QuadScalar) -> Value {
    x.to_string().into()
}

pub fn scalars(v: &[QuadScalar]) -> Value {
    Value::Array(v.iter().map(scalar).collect())
}

/// Shortest round-trip decimal of a double; for plotting only.
pub fn approx(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn interval(iv: &RationalInterval) -> Value {
    json!([rational(iv.lo()), rational(iv.hi())])
}

pub fn rat_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Joins exact scalars with `;` for a single CSV cell.
pub fn joined(v: &[impl ToString]) -> Value {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(";").into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use xda_core::exact::rat;

    fn artifact() -> Artifact {
        let mut t = Table::new("demo", &["n", "value"]);
        t.push("contfrac", json!({"n": 1}), vec![1.into(), rational(&rat(1, 3))]);
        t.push("contfrac", json!({"n": 2}), vec![2.into(), "a,b".into()]);
        let mut a = Artifact::new(t);
        a.set("answer", int(&BigInt::from(42)));
        a
    }

    #[test]
    fn csv_layout() {
        let cfg = ExperimentConfig { format: Format::Csv, ..ExperimentConfig::new("cf", Map::new()) };
        let text = render(&cfg, &artifact());
        let (header, cols, rows) = parse_csv(&text).unwrap();
        assert!(header.starts_with(&format!("xda {VERSION} schema=demo/1 config={}", cfg.hash())));
        assert_eq!(cols, ["n", "value", "module", "certificate"]);
        assert_eq!(rows[0][..3], ["1", "1/3", "contfrac"]);
        assert_eq!(rows[1][1], "a,b");
        assert_eq!(rows[0][3], certificate_id("contfrac", &json!({"n": 1})));
    }

    #[test]
    fn json_layout() {
        let cfg = ExperimentConfig::new("cf", Map::new());
        let v: Value = serde_json::from_str(&render(&cfg, &artifact())).unwrap();
        assert_eq!(v["header"]["status"], "ok");
        assert_eq!(v["header"]["schema"], "demo/1");
        assert_eq!(v["result"]["answer"], 42);
        assert_eq!(v["rows"][1]["module"], "contfrac");
        assert_eq!(v["rows"][1]["certificate"]["n"], 2);
        assert!(v["rows"][0]["certificateId"].as_str().unwrap().starts_with("contfrac:"));
    }

    #[test]
    fn big_integers_become_strings() {
        let big = BigInt::from(u64::MAX) * 10;
        assert_eq!(int(&big), Value::String(big.to_string()));
        assert_eq!(int(&BigInt::from(-5)), json!(-5));
        assert_eq!(int(&BigInt::from(u64::MAX)), json!(u64::MAX));
    }

    #[test]
    fn status_order() {
        assert_eq!(Status::Ok.worst(Status::Exhausted), Status::Exhausted);
        assert_eq!(Status::Invariant.worst(Status::Exhausted), Status::Invariant);
        assert_eq!([Status::Ok, Status::Exhausted, Status::Invariant].map(Status::code), [0, 3, 4]);
    }
}
