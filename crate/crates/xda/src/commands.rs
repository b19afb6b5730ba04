//! One function per subcommand. Each returns an [`Artifact`] or a [`Fail`]
//! that decides the exit code.

use std::cmp::Ordering;

use clap::{Args, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use xda_core::contfrac::{self, CfError, CfExpansion};
use xda_core::exact::{rat, PrecisionExhausted};
use xda_core::extrinsic::{
    certify_quality, extrinsic_search_general_with, psi_census, CantorOracle, CantorSearchParams, CircleOracle,
    ExtrinsicError, ExtrinsicWitness, GeneralParams, IfsOracle, MembershipOracle, OutCertificate, Provenance,
};
use xda_core::ifs::{
    check_osc, cover, line_porosity, membership, segment_scan, verify_out, IfsError, Line,
    MembershipBudget, MembershipVerdict, OpenSet, OscViolation, PorosityParams, Region, SegmentScan,
};
use xda_core::lattice::{claim23_certify, quality_le, GoodPair, LatticeError, SearchParams, Slot};
use xda_core::rap::{
    cantor_endpoints, hausdorff_to_unit, longest_ap, longest_rap, points_1d, prop26_family, NormalizedRap, Point,
    RapError,
};
use xda_core::{Coordinate, QuadScalar, TargetPoint};

use crate::acceptance;
use crate::parallel;
use crate::point::{
    expect_dim, parse_exact_point, parse_point, parse_rational, parse_rational_point, parse_scalar, PointError,
};
use crate::report::{self, approx, int, ints, interval, rat_f64, rational, rationals, scalar, scalars, Artifact, Status, Table};
use crate::system::{load_system, SystemError};

/// Why a command stopped without a normal artifact.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Fail {
    /// Bad input; exit 2.
    #[error("{0}")]
    Invalid(String),
    /// A cap or budget ran out before anything could be reported; exit 3.
    #[error("{0}")]
    Exhausted(String),
    /// A re-check failed; exit 4.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl From<PointError> for Fail {
    fn from(e: PointError) -> Self {
        Fail::Invalid(e.to_string())
    }
}

impl From<SystemError> for Fail {
    fn from(e: SystemError) -> Self {
        match e {
            SystemError::Ifs(e) => e.into(),
            e => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<PrecisionExhausted> for Fail {
    fn from(e: PrecisionExhausted) -> Self {
        Fail::Exhausted(e.to_string())
    }
}

impl From<LatticeError> for Fail {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::HeightCapExceeded { .. } | LatticeError::Undecidable(_) => Fail::Exhausted(e.to_string()),
            LatticeError::RationalPoint | LatticeError::BadParams(_) | LatticeError::DimensionMismatch { .. } => {
                Fail::Invalid(e.to_string())
            }
        }
    }
}

impl From<CfError> for Fail {
    fn from(e: CfError) -> Self {
        match e {
            CfError::PrecisionExhausted { .. } => Fail::Exhausted(e.to_string()),
            CfError::OutOfRange | CfError::Terminated { .. } => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<IfsError> for Fail {
    fn from(e: IfsError) -> Self {
        match e {
            IfsError::NoGapFound(_) => Fail::Exhausted(e.to_string()),
            e => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<RapError> for Fail {
    fn from(e: RapError) -> Self {
        match e {
            RapError::BudgetExceeded(_) => Fail::Exhausted(e.to_string()),
            e => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<ExtrinsicError> for Fail {
    fn from(e: ExtrinsicError) -> Self {
        match e {
            ExtrinsicError::Lattice(e) => e.into(),
            ExtrinsicError::ContinuedFraction(e) => e.into(),
            ExtrinsicError::Precision(e) => e.into(),
            ExtrinsicError::Ifs(e) => e.into(),
            ExtrinsicError::WindowExhausted { .. } | ExtrinsicError::AllIntrinsic(_) => Fail::Exhausted(e.to_string()),
            ExtrinsicError::Invariant(_) => Fail::Invariant(e.to_string()),
            e => Fail::Invalid(e.to_string()),
        }
    }
}

/// Run-wide settings handed to every command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ctx {
    pub precision: u32,
    pub seed: u64,
}

#[derive(Subcommand, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
pub enum Command {
    /// Certified continued fraction expansion of a scalar target.
    Cf(CfArgs),
    /// Good pair of simultaneous approximations with q ≥ Q.
    Goodpair(GoodpairArgs),
    /// The progression r0 + i·r∞ of a good pair with per-entry certificates.
    Progression(ProgressionArgs),
    /// Longest C-roughly arithmetic progression in a finite set.
    RapScan(RapScanArgs),
    /// Exact open set condition check.
    OscCheck(SystemArgs),
    /// Minimal cylinder cover of a region.
    Cover(CoverArgs),
    /// Membership of an exact point in an IFS limit set.
    Member(MemberArgs),
    /// Porosity certificate of a limit set along a line.
    Porosity(PorosityArgs),
    /// Segments covered by a depth-n hull union.
    SegmentScan(SegmentScanArgs),
    /// Semiconvergent search for exterior approximants of a Cantor point.
    CantorDirichlet(CantorArgs),
    /// Progression pipeline for exterior approximants of any target.
    Extrinsic(ExtrinsicArgs),
    /// Counts of close rational approximants of a circle point.
    CircleCensus(CensusArgs),
    /// Runs the acceptance suite.
    Accept(AcceptArgs),
}

impl Command {
    pub fn name(&self) -> String {
        match serde_json::to_value(self).expect("command serializes") {
            Value::Object(m) => m["command"].as_str().expect("tagged").to_string(),
            _ => unreachable!("commands are tagged objects"),
        }
    }

    /// Arguments keyed by flag name, defaults filled in.
    pub fn args(&self) -> serde_json::Map<String, Value> {
        match serde_json::to_value(self).expect("command serializes") {
            Value::Object(mut m) => match m.remove("args") {
                Some(Value::Object(a)) => a,
                _ => serde_json::Map::new(),
            },
            _ => unreachable!("commands are tagged objects"),
        }
    }
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct CfArgs {
    /// Scalar target in (0, 1).
    #[arg(long)]
    pub point: String,
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct SearchArgs {
    /// Lower bound Q for both denominators.
    #[arg(long, default_value_t = 1)]
    pub min_q0: u64,
    /// Largest height scanned.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    /// Height growth factor of the scan blocks.
    #[arg(long, default_value = "3/2")]
    pub rho: String,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct GoodpairArgs {
    #[arg(long)]
    pub point: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct ProgressionArgs {
    #[arg(long)]
    pub point: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
    /// Entries i = 0 … i_max.
    #[arg(long, default_value_t = 64)]
    pub i_max: u64,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct RapScanArgs {
    /// `builtin:cantor:<depth>` or a JSON file holding a list of points.
    #[arg(long)]
    pub set: String,
    /// The RAP constant.
    #[arg(long = "C", default_value = "2")]
    #[serde(rename = "C")]
    pub c: String,
    #[arg(long, default_value_t = 64)]
    pub max_len: usize,
    #[arg(long, default_value_t = 1_000_000_000)]
    pub budget: u64,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct SystemArgs {
    /// `builtin:<name>` or a JSON system file.
    #[arg(long)]
    pub system: String,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct CoverArgs {
    #[arg(long)]
    pub system: String,
    /// `interval:<lo>,<hi>`, `ball:<center>;<radius>` or
    /// `polygon:<x>,<y>;<x>,<y>;…`.
    #[arg(long)]
    pub region: String,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct MemberArgs {
    #[arg(long)]
    pub system: String,
    /// Exact point.
    #[arg(long)]
    pub point: String,
    #[arg(long, default_value_t = 100_000)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_states: usize,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct PorosityArgs {
    #[arg(long)]
    pub system: String,
    /// A point of the line; the origin by default.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub through: Option<String>,
    /// Direction of the line; the first axis by default.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[arg(long, default_value = "1/10")]
    pub epsilon: String,
    /// Radii base^-1 … base^-scales in line units.
    #[arg(long, default_value_t = 4)]
    pub scales: u32,
    #[arg(long, default_value_t = 3)]
    pub scale_base: u32,
    #[arg(long, default_value_t = 9)]
    pub samples: usize,
    #[arg(long, default_value_t = 4)]
    pub center_depth: usize,
    #[arg(long, default_value_t = 24)]
    pub max_depth: usize,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct SegmentScanArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, default_value = "1/20")]
    pub min_len: String,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct CantorArgs {
    /// Base-3 digit stream over {0, 2}.
    #[arg(long)]
    pub point: String,
    #[arg(long, default_value_t = 1)]
    pub n_min: usize,
    #[arg(long, default_value_t = 40)]
    pub n_max: usize,
    /// N*: b runs over a_n … a_n + N*.
    #[arg(long, default_value_t = 8)]
    pub window: usize,
    /// Widening limit; 8·window by default.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_window: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub bucket_base: u64,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct ExtrinsicArgs {
    #[arg(long)]
    pub point: String,
    /// `cantor` (ternary oracle), `circle`, or an IFS as for --system.
    #[arg(long, default_value = "cantor")]
    pub set: String,
    /// Window N ≤ i ≤ 2N of the progression.
    #[arg(long, default_value_t = 8)]
    pub n: u64,
    /// Values of Q, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000, 10000])]
    pub schedule: Vec<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    #[arg(long, default_value = "3/2")]
    pub rho: String,
    #[arg(long, default_value_t = 100_000)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_states: usize,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct CensusArgs {
    /// Exact point of the unit circle.
    #[arg(long)]
    pub point: String,
    /// Exponent c in |x − p/q| < q^-(1+c).
    #[arg(long, default_value = "2")]
    pub c: String,
    #[arg(long, default_value_t = 10_000)]
    pub qmax: u64,
    /// Extrinsic hits are expected only for q up to this.
    #[arg(long, default_value_t = 3)]
    pub threshold: u64,
}

#[derive(Args, Serialize, Clone, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub struct AcceptArgs {
    /// Criteria to run, comma separated; all by default.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub only: Vec<u8>,
}

pub fn run(cmd: &Command, ctx: &Ctx) -> Result<Artifact, Fail> {
    match cmd {
        Command::Cf(a) => cf(a, ctx),
        Command::Goodpair(a) => goodpair(a, ctx),
        Command::Progression(a) => progression(a, ctx),
        Command::RapScan(a) => rap_scan(a),
        Command::OscCheck(a) => osc(a),
        Command::Cover(a) => cover_cmd(a),
        Command::Member(a) => member(a),
        Command::Porosity(a) => porosity(a),
        Command::SegmentScan(a) => segments(a),
        Command::CantorDirichlet(a) => cantor_dirichlet(a, ctx),
        Command::Extrinsic(a) => extrinsic(a, ctx),
        Command::CircleCensus(a) => census(a),
        Command::Accept(a) => accept(a, ctx),
    }
}

fn scalar_target(spec: &str) -> Result<(TargetPoint, Coordinate), Fail> {
    let x = parse_point(spec)?;
    let x = expect_dim(x.clone(), x.dim(), 1)?;
    let c = x.coords()[0].clone();
    Ok((x, c))
}

fn search_params(a: &SearchArgs, ctx: &Ctx) -> Result<SearchParams, Fail> {
    Ok(SearchParams { min_q0: a.min_q0, rho: parse_rational(&a.rho)?, cap: a.cap, precision: ctx.precision })
}

fn approx_json(r: &xda_core::lattice::ApproxVector) -> Value {
    json!({"p": ints(&r.p), "q": int(&r.q)})
}

fn ordering_name(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    }
}

fn slot_name(s: Slot) -> &'static str {
    match s {
        Slot::Zero => "r0",
        Slot::Infinity => "rInf",
    }
}

const CF_COLUMNS: &[&str] = &["n", "a_n", "p", "q", "depth"];

fn cf(a: &CfArgs, ctx: &Ctx) -> Result<Artifact, Fail> {
    let (_, x) = scalar_target(&a.point)?;
    let mut art = Artifact::new(Table::new("cf", CF_COLUMNS));
    let exp = match contfrac::expand(&x, a.terms, ctx.precision) {
        Ok(e) => e,
        Err(CfError::PrecisionExhausted { index, cap }) => {
            art.degrade(Status::Exhausted, format!("a_{index} not certified at precision cap {cap}"));
            if index > 1 {
                contfrac::expand(&x, index - 1, ctx.precision)?
            } else {
                CfExpansion::from_partials(Vec::new())
            }
        }
        Err(e) => return Err(e.into()),
    };
    let conv = exp.convergents();
    for (i, ((an, (p, q)), depth)) in exp.partials().iter().zip(&conv).zip(exp.certification_depths()).enumerate() {
        let cert = json!({"n": i + 1, "a_n": int(an), "depth": depth});
        art.table.push("contfrac", cert, vec![(i + 1).into(), int(an), int(p), int(q), (*depth).into()]);
    }
    art.set("point", a.point.clone().into());
    art.set("partials", ints(exp.partials()));
    art.set("convergents", conv.iter().map(|(p, q)| json!([int(p), int(q)])).collect());
    art.set("certificationDepths", json!(exp.certification_depths()));
    Ok(art)
}

fn pair_summary(art: &mut Artifact, pair: &GoodPair) {
    art.set("r0", approx_json(&pair.r0));
    art.set("rInf", approx_json(&pair.r_inf));
    art.set("height", pair.witness.height.into());
    art.set(
        "certificates",
        pair.witness
            .checks
            .iter()
            .map(|c| {
                json!({
                    "slot": slot_name(c.slot),
                    "coord": c.coord,
                    "residual": interval(&c.residual),
                    "ordering": ordering_name(c.ordering),
                })
            })
            .collect(),
    );
}

const GOODPAIR_COLUMNS: &[&str] = &["slot", "coord", "q", "p", "residual_lo", "residual_hi", "ordering"];

fn goodpair(a: &GoodpairArgs, ctx: &Ctx) -> Result<Artifact, Fail> {
    let x = parse_point(&a.point)?;
    let params = search_params(&a.search, ctx)?;
    let pair = parallel::good_pair(&x, &params)?;
    let mut art = Artifact::new(Table::new("goodpair", GOODPAIR_COLUMNS));
    if let Err(v) = pair.verify(&x, ctx.precision) {
        art.degrade(Status::Invariant, format!("good pair failed re-verification: {v}"));
    }
    pair_summary(&mut art, &pair);
    art.set("minQ0", a.search.min_q0.into());
    art.set("dimension", x.dim().into());
    for c in &pair.witness.checks {
        let r = if c.slot == Slot::Zero { &pair.r0 } else { &pair.r_inf };
        let cert = json!({
            "r0": approx_json(&pair.r0), "rInf": approx_json(&pair.r_inf),
            "slot": slot_name(c.slot), "coord": c.coord, "residual": interval(&c.residual),
            "bound": format!("1/{}", pair.r0.q), "ordering": ordering_name(c.ordering),
        });
        art.table.push(
            "dirichlet-lattice",
            cert,
            vec![
                slot_name(c.slot).into(),
                c.coord.into(),
                int(&r.q),
                int(&r.p[c.coord]),
                rational(c.residual.lo()),
                rational(c.residual.hi()),
                ordering_name(c.ordering).into(),
            ],
        );
    }
    Ok(art)
}

const PROGRESSION_COLUMNS: &[&str] = &["i", "p", "q", "claim23", "quality_lo", "quality_hi", "quality"];

fn progression(a: &ProgressionArgs, ctx: &Ctx) -> Result<Artifact, Fail> {
    let x = parse_point(&a.point)?;
    let params = search_params(&a.search, ctx)?;
    let pair = parallel::good_pair(&x, &params)?;
    let mut art = Artifact::new(Table::new("progression", PROGRESSION_COLUMNS));
    if let Err(v) = pair.verify(&x, ctx.precision) {
        art.degrade(Status::Invariant, format!("good pair failed re-verification: {v}"));
    }
    pair_summary(&mut art, &pair);
    let mut failures = 0;
    for i in 0..=a.i_max {
        let r = pair.r0.add_scaled(&pair.r_inf, &BigInt::from(i));
        let holds = claim23_certify(&x, &r, i, ctx.precision)?;
        if !holds {
            failures += 1;
        }
        let (q, _) = certify_quality(&x, &r, ctx.precision);
        let cert = json!({"i": i, "r": approx_json(&r), "claim23": holds, "quality": interval(&q)});
        art.table.push(
            "dirichlet-lattice",
            cert,
            vec![
                i.into(),
                ints(&r.p).to_string().into(),
                int(&r.q),
                holds.into(),
                rational(q.lo()),
                rational(q.hi()),
                approx(rat_f64(&q.midpoint())),
            ],
        );
    }
    if failures > 0 {
        art.degrade(Status::Invariant, format!("{failures} entries fail the (1+i) bound"));
    }
    // the window N … 2N with N = i_max/2 is a 2-RAP
    let n = (a.i_max / 2) as usize;
    if n >= 1 {
        let cert = prop26_family(&pair.r0.p, &pair.r0.q, &pair.r_inf.p, &pair.r_inf.q, n)?;
        let two = rat(2, 1);
        let ok = cert.verify_with(&two).is_ok();
        if !ok {
            art.degrade(Status::Invariant, "progression window is not a 2-RAP");
        }
        art.set("rap", json!({"n": n, "C": "2", "increment": rationals(&cert.increment), "verified": ok}));
    }
    Ok(art)
}

fn load_points(spec: &str) -> Result<Vec<Point>, Fail> {
    if let Some(rest) = spec.strip_prefix("builtin:cantor:") {
        let depth: u32 = rest.parse().map_err(|_| Fail::Invalid(format!("bad depth in `{spec}`")))?;
        if depth > 16 {
            return Err(Fail::Invalid("Cantor depth above 16 is too large".into()));
        }
        return Ok(points_1d(&cantor_endpoints(depth)));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Fail::Invalid(format!("cannot read `{spec}`: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Fail::Invalid(format!("malformed point set: {e}")))?;
    let items = v.as_array().ok_or_else(|| Fail::Invalid("point set must be a JSON array".into()))?;
    items
        .iter()
        .map(|item| match item {
            Value::String(s) => Ok(parse_rational_point(s)?),
            Value::Array(cs) => cs
                .iter()
                .map(|c| match c {
                    Value::String(s) => Ok(parse_rational(s)?),
                    Value::Number(n) => Ok(parse_rational(&n.to_string())?),
                    _ => Err(Fail::Invalid("coordinates must be strings".into())),
                })
                .collect(),
            Value::Number(n) => Ok(vec![parse_rational(&n.to_string())?]),
            _ => Err(Fail::Invalid("points must be strings or arrays".into())),
        })
        .collect()
}

const RAP_COLUMNS: &[&str] = &["index", "point", "ratio_to_first"];

fn rap_scan(a: &RapScanArgs) -> Result<Artifact, Fail> {
    let points = load_points(&a.set)?;
    let c = parse_rational(&a.c)?;
    let mut art = Artifact::new(Table::new("rap-scan", RAP_COLUMNS));
    let search = match longest_rap(&points, &c, a.max_len, a.budget) {
        Ok(s) => s,
        Err(RapError::BudgetExceeded(s)) => {
            art.degrade(Status::Exhausted, format!("work budget {} exhausted", a.budget));
            *s
        }
        Err(e) => return Err(e.into()),
    };
    art.set("points", points.len().into());
    art.set("C", rational(&c));
    art.set("length", search.length.into());
    art.set("exhausted", search.exhausted.into());
    art.set("work", search.work.into());
    art.set("longestAp", longest_ap(&points, a.max_len).map_or(0, |ap| ap.length).into());
    match &search.certificate {
        Some(cert) => {
            if cert.verify_with(&c).is_err() {
                art.degrade(Status::Invariant, "RAP certificate failed re-verification");
            }
            let pts: Vec<Value> = cert.points.iter().map(|p| rationals(p)).collect();
            let ratios: Vec<Value> = cert.ratios.iter().map(|row| rationals(row)).collect();
            art.set(
                "certificate",
                json!({"points": pts, "increment": rationals(&cert.increment), "C": rational(&cert.c), "ratios": ratios}),
            );
            if let Some(nr) = NormalizedRap::from_certificate(cert) {
                art.set("hausdorff", json!({"distance": rational(&hausdorff_to_unit(&nr)), "bound": rational(&nr.bound())}));
            }
            for (i, p) in cert.points.iter().enumerate() {
                let ratio = if i == 0 { BigRational::zero() } else { cert.ratio(0, i).clone() };
                let row = json!({"index": i, "point": rationals(p), "increment": rationals(&cert.increment), "C": rational(&cert.c)});
                art.table.push("rap", row, vec![i.into(), report::joined(p), rational(&ratio)]);
            }
        }
        None => art.set("certificate", Value::Null),
    }
    Ok(art)
}

fn violation_json(v: &OscViolation) -> Value {
    match v {
        OscViolation::NotContained { map, witness } => {
            json!({"kind": "not-contained", "map": map, "witness": witness.as_ref().map(|w| scalars(w))})
        }
        OscViolation::Overlap { a, b, witness } => {
            json!({"kind": "overlap", "maps": [a, b], "witness": scalars(witness)})
        }
    }
}

const OSC_COLUMNS: &[&str] = &["system", "holds", "violation"];

fn osc(a: &SystemArgs) -> Result<Artifact, Fail> {
    let ifs = load_system(&a.system)?;
    let mut art = Artifact::new(Table::new("osc-check", OSC_COLUMNS));
    let (holds, violation) = match check_osc(&ifs) {
        Ok(()) => (true, Value::Null),
        Err(v) => {
            if !v.verify(&ifs) {
                art.degrade(Status::Invariant, "OSC violation witness failed re-verification");
            }
            (false, violation_json(&v))
        }
    };
    art.set("system", a.system.clone().into());
    art.set("maps", ifs.len().into());
    art.set("holds", holds.into());
    art.set("violation", violation.clone());
    let kind = violation.get("kind").cloned().unwrap_or(Value::Null);
    art.table.push("ifs", json!({"holds": holds, "violation": violation}), vec![a.system.clone().into(), holds.into(), kind]);
    Ok(art)
}

fn parse_vertices(s: &str) -> Result<Vec<Vec<QuadScalar>>, Fail> {
    s.split(';').map(|v| Ok(parse_exact_point(v)?)).collect()
}

pub fn parse_region(spec: &str) -> Result<Region, Fail> {
    let bad = || Fail::Invalid(format!("cannot parse region `{spec}`"));
    if let Some(body) = spec.strip_prefix("interval:") {
        let (lo, hi) = body.split_once(',').ok_or_else(bad)?;
        let (lo, hi) = (parse_scalar(lo)?, parse_scalar(hi)?);
        if lo > hi {
            return Err(Fail::Invalid("interval needs lo ≤ hi".into()));
        }
        return Ok(Region::Interval { lo, hi });
    }
    if let Some(body) = spec.strip_prefix("ball:") {
        let (c, r) = body.split_once(';').ok_or_else(bad)?;
        let radius = parse_rational(r)?;
        if radius <= BigRational::zero() {
            return Err(Fail::Invalid("ball radius must be positive".into()));
        }
        return Ok(Region::Ball { center: parse_exact_point(c)?, radius });
    }
    if let Some(body) = spec.strip_prefix("polygon:") {
        return match OpenSet::polygon(parse_vertices(body)?)? {
            OpenSet::Polygon(vs) => Ok(Region::Polygon(vs)),
            _ => Err(bad()),
        };
    }
    Err(bad())
}

const COVER_COLUMNS: &[&str] = &["word", "length", "ratio"];

fn cover_cmd(a: &CoverArgs) -> Result<Artifact, Fail> {
    let ifs = load_system(&a.system)?;
    let region = parse_region(&a.region)?;
    let c = cover(&ifs, &region)?;
    let mut art = Artifact::new(Table::new("cover", COVER_COLUMNS));
    if !c.check() {
        art.degrade(Status::Invariant, "cover failed its own checks");
    }
    art.set("count", c.len().into());
    art.set("gamma", rational(&c.gamma));
    art.set("diam2", scalar(&c.diam2));
    art.set("words", c.words.iter().map(|w| Value::from(ifs.word_label(w))).collect());
    for (w, r) in c.words.iter().zip(&c.ratios) {
        let cert = json!({"word": w, "ratio": rational(r), "diam2": scalar(&c.diam2)});
        art.table.push("ifs", cert, vec![ifs.word_label(w).into(), w.len().into(), rational(r)]);
    }
    Ok(art)
}

const MEMBER_COLUMNS: &[&str] = &["point", "verdict", "depth", "prefix", "cycle"];

fn member(a: &MemberArgs) -> Result<Artifact, Fail> {
    let ifs = load_system(&a.system)?;
    let x = parse_exact_point(&a.point)?;
    let budget = MembershipBudget { max_depth: a.max_depth, max_states: a.max_states };
    let verdict = membership(&ifs, &x, budget)?;
    let mut art = Artifact::new(Table::new("member", MEMBER_COLUMNS));
    let (name, depth, prefix, cycle) = match &verdict {
        MembershipVerdict::In(cert) => {
            if !cert.verify(&ifs, &x) {
                art.degrade(Status::Invariant, "IN certificate failed re-verification");
            }
            ("IN", Value::Null, ifs.word_label(&cert.prefix), ifs.word_label(&cert.cycle))
        }
        MembershipVerdict::Out(n) => {
            if !verify_out(&ifs, &x, *n)? {
                art.degrade(Status::Invariant, "OUT depth failed re-verification");
            }
            ("OUT", (*n).into(), String::new(), String::new())
        }
        MembershipVerdict::Unknown { states } => {
            art.degrade(Status::Exhausted, format!("budget exhausted after {states} states"));
            ("UNKNOWN", Value::Null, String::new(), String::new())
        }
    };
    art.set("system", a.system.clone().into());
    art.set("point", scalars(&x));
    art.set("verdict", name.into());
    let cert = json!({"verdict": name, "depth": depth, "prefix": prefix, "cycle": cycle});
    art.set("certificate", cert.clone());
    art.table.push("ifs", cert, vec![report::joined(&x), name.into(), depth, prefix.into(), cycle.into()]);
    Ok(art)
}

const POROSITY_COLUMNS: &[&str] = &["center", "radius", "gap_lo", "gap_hi", "depth", "ratio"];

fn porosity(a: &PorosityArgs) -> Result<Artifact, Fail> {
    let ifs = load_system(&a.system)?;
    let d = ifs.dim();
    let point = match &a.through {
        Some(s) => parse_exact_point(s)?,
        None => vec![QuadScalar::zero(); d],
    };
    let direction = match &a.direction {
        Some(s) => parse_exact_point(s)?,
        None => (0..d).map(|i| QuadScalar::from_int(i64::from(i == 0))).collect(),
    };
    let line = Line::new(point, direction)?;
    if a.scale_base < 2 {
        return Err(Fail::Invalid("scale base must be at least 2".into()));
    }
    let base = BigInt::from(a.scale_base);
    let scales = (1..=a.scales).map(|i| BigRational::new(BigInt::one(), num_traits::pow(base.clone(), i as usize))).collect();
    let params = PorosityParams {
        epsilon: parse_rational(&a.epsilon)?,
        scales,
        samples: a.samples,
        center_depth: a.center_depth,
        max_depth: a.max_depth,
    };
    let cert = line_porosity(&ifs, &line, &params)?;
    let mut art = Artifact::new(Table::new("porosity", POROSITY_COLUMNS));
    let mut bad = 0;
    for w in &cert.witnesses {
        if !w.verify(&ifs, &line)? {
            bad += 1;
        }
        let row = json!({
            "center": scalar(&w.center), "radius": rational(&w.radius),
            "gap": [scalar(&w.gap.0), scalar(&w.gap.1)], "depth": w.depth, "ratio": scalar(&w.ratio),
        });
        art.table.push(
            "ifs",
            row,
            vec![scalar(&w.center), rational(&w.radius), scalar(&w.gap.0), scalar(&w.gap.1), w.depth.into(), scalar(&w.ratio)],
        );
    }
    if bad > 0 {
        art.degrade(Status::Invariant, format!("{bad} gap witnesses failed re-verification"));
    }
    art.set("epsilon", rational(&cert.epsilon));
    art.set("certified", scalar(&cert.certified));
    art.set("witnesses", cert.witnesses.len().into());
    Ok(art)
}

const SEGMENT_COLUMNS: &[&str] = &["start", "end", "length2", "line_point", "line_direction"];

fn segments(a: &SegmentScanArgs) -> Result<Artifact, Fail> {
    let ifs = load_system(&a.system)?;
    let min_len = parse_rational(&a.min_len)?;
    let mut art = Artifact::new(Table::new("segment-scan", SEGMENT_COLUMNS));
    art.set("depth", a.depth.into());
    art.set("minLen", rational(&min_len));
    match segment_scan(&ifs, a.depth, &min_len)? {
        SegmentScan::Found(segs) => {
            art.set("found", true.into());
            art.set("segments", segs.len().into());
            for s in &segs {
                let cert = json!({
                    "start": scalars(&s.start), "end": scalars(&s.end), "length2": scalar(&s.length2),
                    "depth": a.depth,
                });
                art.table.push(
                    "ifs",
                    cert,
                    vec![
                        report::joined(&s.start),
                        report::joined(&s.end),
                        scalar(&s.length2),
                        report::joined(&s.line.point),
                        report::joined(&s.line.direction),
                    ],
                );
            }
        }
        SegmentScan::NoneAtResolution { lines, longest2 } => {
            art.set("found", false.into());
            art.set("lines", lines.into());
            art.set("longest2", scalar(&longest2));
        }
    }
    Ok(art)
}

/// Columns of the `cantor-dirichlet` table.
pub const CANTOR_COLUMNS: &[&str] =
    &["n", "a_n", "b", "p", "q", "membership", "quality_lo", "quality_hi", "quality", "best"];

fn witness_json(w: &ExtrinsicWitness) -> Value {
    let prov = match &w.provenance {
        Provenance::Semiconvergent { n, b } => json!({"kind": "semiconvergent", "n": n, "b": int(b)}),
        Provenance::Progression { q_min, r0, r_inf, i } => {
            json!({"kind": "progression", "qMin": q_min, "r0": approx_json(r0), "rInf": approx_json(r_inf), "i": i})
        }
    };
    json!({
        "p": ints(&w.approx.p), "q": int(&w.approx.q), "out": out_name(&w.out),
        "quality": interval(&w.quality), "precision": w.precision, "provenance": prov,
    })
}

fn out_name(c: &OutCertificate) -> String {
    match c {
        OutCertificate::Ternary => "ternary".into(),
        OutCertificate::Depth(n) => format!("depth:{n}"),
        OutCertificate::Residual(r) => format!("residual:{r}"),
    }
}

pub fn cantor_dirichlet(a: &CantorArgs, ctx: &Ctx) -> Result<Artifact, Fail> {
    let (target, x) = scalar_target(&a.point)?;
    let params = CantorSearchParams {
        n_min: a.n_min,
        n_max: a.n_max,
        window: a.window,
        max_window: a.max_window.unwrap_or(a.window.max(1) * 8),
        cap: ctx.precision,
        bucket_base: a.bucket_base,
    };
    if params.max_window < params.window {
        return Err(Fail::Invalid("max-window must be at least window".into()));
    }
    let search = parallel::cantor_search(&x, &params)?;
    let mut art = Artifact::new(Table::new("cantor-dirichlet", CANTOR_COLUMNS));
    let mut levels = Vec::new();
    for level in &search.levels {
        let best_q = level.best.as_ref().map(|w| (w.approx.p[0].clone(), w.approx.q.clone()));
        match &level.best {
            Some(w) if !w.verify(&target, &CantorOracle) => {
                art.degrade(Status::Invariant, format!("level {}: witness failed re-verification", level.n));
            }
            None => art.degrade(Status::Exhausted, format!("level {}: no OUT semiconvergent up to b = a_n + {}", level.n, level.width)),
            _ => {}
        }
        for row in &level.rows {
            let best = best_q.as_ref().is_some_and(|(p, q)| *p == row.p && *q == row.q);
            let membership = if row.inside { "IN" } else { "OUT" };
            let cert = json!({
                "n": row.n, "b": int(&row.b), "p": int(&row.p), "q": int(&row.q),
                "membership": membership, "oracle": "ternary", "quality": interval(&row.quality),
            });
            art.table.push(
                "extrinsic",
                cert,
                vec![
                    row.n.into(),
                    int(&row.a_n),
                    int(&row.b),
                    int(&row.p),
                    int(&row.q),
                    membership.into(),
                    rational(row.quality.lo()),
                    rational(row.quality.hi()),
                    approx(rat_f64(&row.quality.midpoint())),
                    best.into(),
                ],
            );
        }
        levels.push(json!({
            "n": level.n, "width": level.width, "widenedFrom": level.widened_from,
            "withinBound": level.within_bound, "best": level.best.as_ref().map(witness_json),
        }));
    }
    let profile: Vec<Value> = search
        .profile
        .buckets
        .iter()
        .map(|b| json!({"lo": int(&b.lo), "hi": int(&b.hi), "minQuality": b.min_quality.as_ref().map(interval), "witness": b.witness}))
        .collect();
    art.set("point", a.point.clone().into());
    art.set("window", a.window.into());
    art.set("partials", ints(&search.partials));
    art.set("allIntrinsic", json!(search.all_intrinsic));
    art.set("levels", Value::Array(levels));
    art.set("profile", Value::Array(profile));
    art.set("maxMinQuality", search.profile.max_min_quality().map(interval).unwrap_or(Value::Null));
    art.set("allWithinBound", search.levels.iter().all(|l| l.within_bound).into());
    Ok(art)
}

fn oracle_for(set: &str, budget: MembershipBudget) -> Result<Box<dyn MembershipOracle>, Fail> {
    Ok(match set {
        "cantor" => Box::new(CantorOracle),
        "circle" => Box::new(CircleOracle),
        spec => Box::new(IfsOracle { ifs: load_system(spec)?, budget }),
    })
}

const EXTRINSIC_COLUMNS: &[&str] =
    &["q_min", "i", "p", "q", "out", "quality_lo", "quality_hi", "quality", "within_bound"];

fn extrinsic(a: &ExtrinsicArgs, ctx: &Ctx) -> Result<Artifact, Fail> {
    let x = parse_point(&a.point)?;
    let oracle = oracle_for(&a.set, MembershipBudget { max_depth: a.max_depth, max_states: a.max_states })?;
    if a.schedule.is_empty() {
        return Err(Fail::Invalid("schedule is empty".into()));
    }
    let params = GeneralParams {
        n: a.n,
        schedule: a.schedule.clone(),
        search: SearchParams { min_q0: 1, rho: parse_rational(&a.rho)?, cap: a.cap, precision: ctx.precision },
    };
    let results = extrinsic_search_general_with(&x, oracle.as_ref(), &params, parallel::good_pair)?;
    let mut art = Artifact::new(Table::new("extrinsic", EXTRINSIC_COLUMNS));
    // in dimension 1 every window entry has q²|x − p/q| ≤ (1+2N)²
    let bound = (x.dim() == 1).then(|| BigRational::from_integer(BigInt::from((1 + 2 * a.n) * (1 + 2 * a.n))));
    let mut found = Vec::new();
    for (q_min, res) in a.schedule.iter().zip(results) {
        match res {
            Ok(w) => {
                if !w.verify(&x, oracle.as_ref()) {
                    art.degrade(Status::Invariant, format!("Q = {q_min}: witness failed re-verification"));
                }
                let within = match &bound {
                    Some(b) => Value::from(quality_le(&x, &w.approx, b, ctx.precision)?),
                    None => Value::Null,
                };
                let i = match &w.provenance {
                    Provenance::Progression { i, .. } => *i,
                    Provenance::Semiconvergent { .. } => 0,
                };
                art.table.push(
                    "extrinsic",
                    witness_json(&w),
                    vec![
                        (*q_min).into(),
                        i.into(),
                        ints(&w.approx.p).to_string().into(),
                        int(&w.approx.q),
                        out_name(&w.out).into(),
                        rational(w.quality.lo()),
                        rational(w.quality.hi()),
                        approx(rat_f64(&w.quality.midpoint())),
                        within,
                    ],
                );
                found.push(witness_json(&w));
            }
            Err(e) => match Fail::from(e) {
                Fail::Exhausted(m) => art.degrade(Status::Exhausted, format!("Q = {q_min}: {m}")),
                Fail::Invariant(m) => art.degrade(Status::Invariant, format!("Q = {q_min}: {m}")),
                Fail::Invalid(m) => return Err(Fail::Invalid(m)),
            },
        }
    }
    art.set("point", a.point.clone().into());
    art.set("set", a.set.clone().into());
    art.set("n", a.n.into());
    art.set("qualityBound", bound.as_ref().map(rational).unwrap_or(Value::Null));
    art.set("witnesses", Value::Array(found));
    Ok(art)
}

const CENSUS_COLUMNS: &[&str] = &["q", "p", "kind"];

fn census(a: &CensusArgs) -> Result<Artifact, Fail> {
    let x = parse_point(&a.point)?;
    let c = parse_rational(&a.c)?;
    let counts = psi_census(&x, &c, a.qmax, a.threshold)?;
    let mut art = Artifact::new(Table::new("circle-census", CENSUS_COLUMNS));
    if !counts.exclusion_violations.is_empty() {
        art.degrade(Status::Invariant, "exclusion bound exceeded a measured distance");
    }
    for h in &counts.hits {
        let kind = if h.on_circle { "intrinsic" } else { "extrinsic" };
        let residual = h.p.iter().map(|v| v * v).sum::<BigInt>() - &h.q * &h.q;
        let cert = json!({"p": ints(&h.p), "q": int(&h.q), "onCircle": h.on_circle, "residual": int(&residual)});
        art.table.push("extrinsic", cert, vec![int(&h.q), ints(&h.p).to_string().into(), kind.into()]);
    }
    art.set("point", a.point.clone().into());
    art.set("c", rational(&c));
    art.set("qmax", a.qmax.into());
    art.set("threshold", counts.threshold.into());
    art.set("intrinsic", counts.intrinsic.into());
    art.set("extrinsic", counts.extrinsic.into());
    art.set("extrinsicBeyond", counts.extrinsic_beyond.into());
    art.set("exclusionViolations", counts.exclusion_violations.len().into());
    Ok(art)
}

const ACCEPT_COLUMNS: &[&str] = &["id", "name", "pass", "detail"];

fn accept(a: &AcceptArgs, ctx: &Ctx) -> Result<Artifact, Fail> {
    let results = acceptance::run(&acceptance::Options { seed: ctx.seed, precision: ctx.precision, only: a.only.clone() });
    let mut art = Artifact::new(Table::new("accept", ACCEPT_COLUMNS));
    for r in &results {
        eprintln!("{}", r.line());
        let cert = json!({"id": r.id, "pass": r.pass, "detail": r.detail});
        art.table.push("cli", cert, vec![r.id.into(), r.name.into(), r.pass.into(), r.detail.clone().into()]);
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    art.set("criteria", results.len().into());
    art.set("failed", failed.into());
    if failed > 0 {
        art.degrade(Status::Invariant, format!("{failed} acceptance criteria failed"));
    }
    Ok(art)
}
