//! Extrinsic approximation: rationals close to a point of `S` but outside `S`.
//!
//! Two pipelines produce witnesses. The Cantor one walks semiconvergent
//! windows of the continued fraction. The general one walks the progression
//! `r₀ + i·r_∞` of a good pair over `N ≤ i ≤ 2N`, where the projected points
//! form a 2-RAP, so a set without long RAPs must miss one of them. Both
//! classify candidates with exact membership oracles and certify the
//! Dirichlet quality `q^{1+1/d}·‖x − p/q‖_max`.
//!
//! The rest covers the two exact obstructions (rational lines and the unit
//! circle) and the circle census.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::contfrac::{self, semiconvergent, CfError};
use crate::exact::{squarefree_decompose, Coordinate, PrecisionExhausted, QuadScalar, RationalInterval, TargetPoint};
use crate::ifs::{cantor_membership, membership, verify_out, IfSystem, IfsError, MembershipBudget, MembershipVerdict};
use crate::lattice::{self, claim23_certify, quality, quality_le, ApproxVector, GoodPair, LatticeError, SearchParams};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExtrinsicError {
    #[error("target is rational")]
    RationalPoint,
    #[error("target is not a base-3 digit stream over {{0, 2}}")]
    NotCantorTarget,
    #[error("every semiconvergent at level {0} lies in the set")]
    AllIntrinsic(usize),
    #[error("no certified exterior point in the window for q₀ ≥ {q_min} ({inside} inside, {unknown} unknown)")]
    WindowExhausted { q_min: u64, inside: usize, unknown: usize },
    #[error("point lies on the line")]
    OnLine,
    #[error("point lies on the circle")]
    OnCircle,
    #[error("target is not an exact point of the unit circle")]
    NotOnCircle,
    #[error("{0}")]
    BadParams(&'static str),
    #[error("internal invariant violated: {0}")]
    Invariant(&'static str),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    ContinuedFraction(#[from] CfError),
    #[error(transparent)]
    Precision(#[from] PrecisionExhausted),
    #[error(transparent)]
    Ifs(#[from] IfsError),
}

/// Why a rational point is outside the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutCertificate {
    /// The ternary expansion has an unavoidable digit 1, or the point is
    /// outside `[0, 1]`.
    Ternary,
    /// No depth-`n` cylinder hull contains the point.
    Depth(usize),
    /// `‖p‖² − q² ≠ 0` for the circle.
    Residual(BigInt),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    In,
    Out(OutCertificate),
    Unknown,
}

/// Exact membership for rational points. `Out` must be sound; `Unknown` is
/// never counted as exterior.
pub trait MembershipOracle {
    fn dim(&self) -> usize;
    fn classify(&self, p: &[BigRational]) -> OracleVerdict;
    fn reverify_out(&self, p: &[BigRational], cert: &OutCertificate) -> bool;
}

/// The middle-thirds Cantor set via ternary expansions.
#[derive(Clone, Copy, Debug, Default)]
pub struct CantorOracle;

impl MembershipOracle for CantorOracle {
    fn dim(&self) -> usize {
        1
    }

    fn classify(&self, p: &[BigRational]) -> OracleVerdict {
        match cantor_membership(&p[0]) {
            Ok(true) => OracleVerdict::In,
            Ok(false) | Err(_) => OracleVerdict::Out(OutCertificate::Ternary),
        }
    }

    fn reverify_out(&self, p: &[BigRational], cert: &OutCertificate) -> bool {
        *cert == OutCertificate::Ternary && matches!(self.classify(p), OracleVerdict::Out(_))
    }
}

/// Any exact IFS via preimage search.
#[derive(Clone, Debug)]
pub struct IfsOracle {
    pub ifs: IfSystem,
    pub budget: MembershipBudget,
}

fn quads(p: &[BigRational]) -> Vec<QuadScalar> {
    p.iter().map(QuadScalar::from_rational).collect()
}

impl MembershipOracle for IfsOracle {
    fn dim(&self) -> usize {
        self.ifs.dim()
    }

    fn classify(&self, p: &[BigRational]) -> OracleVerdict {
        match membership(&self.ifs, &quads(p), self.budget) {
            Ok(MembershipVerdict::In(_)) => OracleVerdict::In,
            Ok(MembershipVerdict::Out(n)) => OracleVerdict::Out(OutCertificate::Depth(n)),
            _ => OracleVerdict::Unknown,
        }
    }

    fn reverify_out(&self, p: &[BigRational], cert: &OutCertificate) -> bool {
        match cert {
            OutCertificate::Depth(n) => verify_out(&self.ifs, &quads(p), *n).unwrap_or(false),
            _ => false,
        }
    }
}

/// The unit circle.
#[derive(Clone, Copy, Debug, Default)]
pub struct CircleOracle;

fn circle_residual(p: &[BigRational]) -> BigInt {
    let q = p[0].denom().lcm(p[1].denom());
    let a = (&p[0] * BigRational::from_integer(q.clone())).to_integer();
    let b = (&p[1] * BigRational::from_integer(q.clone())).to_integer();
    &a * &a + &b * &b - &q * &q
}

impl MembershipOracle for CircleOracle {
    fn dim(&self) -> usize {
        2
    }

    fn classify(&self, p: &[BigRational]) -> OracleVerdict {
        let r = circle_residual(p);
        if r.is_zero() {
            OracleVerdict::In
        } else {
            OracleVerdict::Out(OutCertificate::Residual(r))
        }
    }

    fn reverify_out(&self, p: &[BigRational], cert: &OutCertificate) -> bool {
        matches!(cert, OutCertificate::Residual(r) if !r.is_zero() && *r == circle_residual(p))
    }
}

/// Where a witness came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// `[0; a₁, …, a_{n−1}, b]`.
    Semiconvergent { n: usize, b: BigInt },
    /// `r₀ + i·r_∞` for the good pair found at `q₀ ≥ q_min`.
    Progression { q_min: u64, r0: ApproxVector, r_inf: ApproxVector, i: u64 },
}

/// A certified exterior approximant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtrinsicWitness {
    pub approx: ApproxVector,
    pub out: OutCertificate,
    /// Encloses `q^{1+1/d}·‖x − p/q‖_max`.
    pub quality: RationalInterval,
    /// Precision index the enclosure was computed at.
    pub precision: u32,
    pub provenance: Provenance,
}

impl ExtrinsicWitness {
    pub fn point(&self) -> Vec<BigRational> {
        self.approx.point().expect("witnesses have q ≥ 1")
    }

    /// Re-checks the exterior certificate and recomputes the enclosure; for
    /// exact targets in dimension 1 also checks that it contains the exact
    /// quality.
    pub fn verify(&self, x: &TargetPoint, oracle: &dyn MembershipOracle) -> bool {
        if !oracle.reverify_out(&self.point(), &self.out) {
            return false;
        }
        let iv = quality(x, &self.approx, self.precision);
        if iv != self.quality {
            return false;
        }
        match x.exact() {
            Some(xs) if xs.len() == 1 => {
                let q = BigRational::from_integer(self.approx.q.clone());
                let v = xs[0].mul_rational(&q).add_rational(&-BigRational::from_integer(self.approx.p[0].clone()));
                let v = v.abs().mul_rational(&q);
                QuadScalar::from_rational(iv.lo()) <= v && v <= QuadScalar::from_rational(iv.hi())
            }
            _ => true,
        }
    }
}

/// Encloses the quality to relative width `2^-32`, refining up to `cap`.
pub fn certify_quality(x: &TargetPoint, r: &ApproxVector, cap: u32) -> (RationalInterval, u32) {
    let tol = BigRational::new(BigInt::one(), BigInt::one() << 32usize);
    let mut k = 16u32.min(cap);
    loop {
        let iv = quality(x, r, k);
        let scale = if iv.hi().is_zero() { BigRational::one() } else { iv.hi().clone() };
        if iv.width() <= &tol * &scale || k >= cap {
            return (iv, k);
        }
        k = k.saturating_mul(2).min(cap);
    }
}

/// Geometric buckets `[Q_k, Q_{k+1})` over `[q_min, q_max]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleBucket {
    pub lo: BigInt,
    pub hi: BigInt,
    pub min_quality: Option<RationalInterval>,
    /// Index into the witness list the profile was built from.
    pub witness: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleProfile {
    pub buckets: Vec<ScaleBucket>,
}

impl ScaleProfile {
    pub fn build(witnesses: &[ExtrinsicWitness], q_min: &BigInt, q_max: &BigInt, base: u64) -> Self {
        let base = BigInt::from(base.max(2));
        let mut buckets = Vec::new();
        let mut lo = q_min.max(&BigInt::one()).clone();
        while lo <= *q_max {
            let hi = &lo * &base;
            buckets.push(ScaleBucket { lo: lo.clone(), hi: hi.clone(), min_quality: None, witness: None });
            lo = hi;
        }
        for (i, w) in witnesses.iter().enumerate() {
            if let Some(b) = buckets.iter_mut().find(|b| b.lo <= w.approx.q && w.approx.q < b.hi) {
                if b.min_quality.as_ref().is_none_or(|m| w.quality.hi() < m.hi()) {
                    b.min_quality = Some(w.quality.clone());
                    b.witness = Some(i);
                }
            }
        }
        ScaleProfile { buckets }
    }

    /// The largest per-bucket minimum (by upper end).
    pub fn max_min_quality(&self) -> Option<&RationalInterval> {
        self.buckets.iter().filter_map(|b| b.min_quality.as_ref()).max_by(|a, b| a.hi().cmp(b.hi()))
    }
}

/// One semiconvergent of the Cantor scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantorRow {
    pub n: usize,
    pub a_n: BigInt,
    pub b: BigInt,
    pub p: BigInt,
    pub q: BigInt,
    pub inside: bool,
    pub quality: RationalInterval,
}

/// The window at level `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantorLevel {
    pub n: usize,
    pub rows: Vec<CantorRow>,
    /// Window widths that came back all-intrinsic before the final one.
    pub widened_from: Vec<usize>,
    pub width: usize,
    /// The exterior member of least quality.
    pub best: Option<ExtrinsicWitness>,
    /// `best` certified `≤ (1 + width)²`.
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantorSearchParams {
    pub n_min: usize,
    pub n_max: usize,
    /// `N*`: the window is `b = a_n … a_n + N*`.
    pub window: usize,
    /// Widening stops here.
    pub max_window: usize,
    pub cap: u32,
    pub bucket_base: u64,
}

impl CantorSearchParams {
    pub fn new(n_max: usize, window: usize) -> Self {
        CantorSearchParams {
            n_min: 1,
            n_max,
            window,
            max_window: window.max(1) * 8,
            cap: crate::exact::DEFAULT_MAX_PRECISION,
            bucket_base: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CantorSearch {
    pub partials: Vec<BigInt>,
    pub levels: Vec<CantorLevel>,
    /// Levels whose first window was all-intrinsic.
    pub all_intrinsic: Vec<usize>,
    pub witnesses: Vec<ExtrinsicWitness>,
    pub profile: ScaleProfile,
}

/// Checks that `x` is an irrational point given by ternary digits in {0, 2}.
pub fn check_cantor_target(x: &Coordinate) -> Result<(), ExtrinsicError> {
    if x.is_certified_rational() {
        return Err(ExtrinsicError::RationalPoint);
    }
    match x {
        Coordinate::Digits(s) if s.base() == 3 && s.alphabet().iter().all(|d| *d == 0 || *d == 2) => Ok(()),
        _ => Err(ExtrinsicError::NotCantorTarget),
    }
}

/// Partial quotients `a₁ … a_{n_max}` of a Cantor target.
pub fn cantor_partials(x: &Coordinate, n_max: usize, cap: u32) -> Result<Vec<BigInt>, ExtrinsicError> {
    check_cantor_target(x)?;
    Ok(contfrac::expand(x, n_max, cap)?.partials().to_vec())
}

/// Scans `b = a_n … a_n + width` at level `n`, doubling the width while the
/// whole window lies in the Cantor set.
pub fn cantor_level(
    x: &Coordinate,
    partials: &[BigInt],
    n: usize,
    width: usize,
    max_window: usize,
    cap: u32,
) -> Result<CantorLevel, ExtrinsicError> {
    let target = TargetPoint::scalar(x.clone());
    let a_n = partials.get(n - 1).ok_or(ExtrinsicError::BadParams("level beyond the expansion"))?.clone();
    let mut widened_from = Vec::new();
    let mut rows = Vec::new();
    let mut w = width;
    let mut start = 0usize;
    loop {
        for j in start..=w {
            let b = &a_n + BigInt::from(j);
            let s = semiconvergent(partials, n, &b).ok_or(ExtrinsicError::BadParams("level beyond the expansion"))?;
            let r = ApproxVector::new(vec![s.p.clone()], s.q.clone());
            let inside = cantor_membership(&BigRational::new(s.p.clone(), s.q.clone())).unwrap_or(false);
            let (quality, _) = certify_quality(&target, &r, cap);
            rows.push(CantorRow { n, a_n: a_n.clone(), b, p: s.p, q: s.q, inside, quality });
        }
        if rows.iter().any(|r| !r.inside) || w >= max_window {
            break;
        }
        widened_from.push(w);
        start = w + 1;
        w = (w.max(1) * 2).min(max_window);
    }
    let best_row = rows.iter().filter(|r| !r.inside).min_by(|a, b| a.quality.hi().cmp(b.quality.hi()));
    let mut best = None;
    let mut within_bound = false;
    if let Some(row) = best_row {
        let r = ApproxVector::new(vec![row.p.clone()], row.q.clone());
        let (quality, precision) = certify_quality(&target, &r, cap);
        let bound = BigRational::from_integer(BigInt::from((1 + w) * (1 + w)));
        within_bound = quality_le(&target, &r, &(bound), cap)?;
        best = Some(ExtrinsicWitness {
            approx: r,
            out: OutCertificate::Ternary,
            quality,
            precision,
            provenance: Provenance::Semiconvergent { n, b: row.b.clone() },
        });
    }
    Ok(CantorLevel { n, rows, widened_from, width: w, best, within_bound })
}

/// The semiconvergent experiment over `n_min ≤ n ≤ n_max`.
pub fn extrinsic_search_cantor(x: &Coordinate, params: &CantorSearchParams) -> Result<CantorSearch, ExtrinsicError> {
    if params.n_min == 0 || params.n_min > params.n_max {
        return Err(ExtrinsicError::BadParams("need 1 ≤ n_min ≤ n_max"));
    }
    let partials = cantor_partials(x, params.n_max, params.cap)?;
    let levels = (params.n_min..=params.n_max)
        .map(|n| cantor_level(x, &partials, n, params.window, params.max_window, params.cap))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble_cantor(partials, levels, params.bucket_base))
}

/// Collects per-level results, in level order, into a search report.
pub fn assemble_cantor(partials: Vec<BigInt>, levels: Vec<CantorLevel>, bucket_base: u64) -> CantorSearch {
    let all_intrinsic = levels.iter().filter(|l| !l.widened_from.is_empty() || l.best.is_none()).map(|l| l.n).collect();
    let witnesses: Vec<ExtrinsicWitness> = levels.iter().filter_map(|l| l.best.clone()).collect();
    let q_min = witnesses.iter().map(|w| w.approx.q.clone()).min().unwrap_or_else(BigInt::one);
    let q_max = witnesses.iter().map(|w| w.approx.q.clone()).max().unwrap_or_else(BigInt::one);
    let profile = ScaleProfile::build(&witnesses, &q_min, &q_max, bucket_base);
    CantorSearch { partials, levels, all_intrinsic, witnesses, profile }
}

/// Parameters of the progression pipeline.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralParams {
    /// The window is `N ≤ i ≤ 2N`.
    pub n: u64,
    pub schedule: Vec<u64>,
    pub search: SearchParams,
}

/// Scans the progression of one good pair.
pub fn progression_witness(
    x: &TargetPoint,
    oracle: &dyn MembershipOracle,
    pair: &GoodPair,
    n: u64,
    q_min: u64,
    cap: u32,
) -> Result<ExtrinsicWitness, ExtrinsicError> {
    let (mut inside, mut unknown) = (0, 0);
    for i in n..=2 * n {
        let r = pair.r0.add_scaled(&pair.r_inf, &BigInt::from(i));
        let p = r.point().ok_or(ExtrinsicError::Invariant("progression entry with q = 0"))?;
        match oracle.classify(&p) {
            OracleVerdict::In => inside += 1,
            OracleVerdict::Unknown => unknown += 1,
            OracleVerdict::Out(out) => {
                if !claim23_certify(x, &r, i, cap)? {
                    return Err(ExtrinsicError::Invariant("progression entry fails the (1+i) bound"));
                }
                let (quality, precision) = certify_quality(x, &r, cap);
                let provenance =
                    Provenance::Progression { q_min, r0: pair.r0.clone(), r_inf: pair.r_inf.clone(), i };
                return Ok(ExtrinsicWitness { approx: r, out, quality, precision, provenance });
            }
        }
    }
    Err(ExtrinsicError::WindowExhausted { q_min, inside, unknown })
}

/// Runs the progression pipeline at each `Q` of the schedule, finding good
/// pairs with `find_pair` (so callers can parallelize the height scan).
pub fn extrinsic_search_general_with<F>(
    x: &TargetPoint,
    oracle: &dyn MembershipOracle,
    params: &GeneralParams,
    mut find_pair: F,
) -> Result<Vec<Result<ExtrinsicWitness, ExtrinsicError>>, ExtrinsicError>
where
    F: FnMut(&TargetPoint, &SearchParams) -> Result<GoodPair, LatticeError>,
{
    if x.dim() != oracle.dim() {
        return Err(ExtrinsicError::Lattice(LatticeError::DimensionMismatch { expected: oracle.dim(), got: x.dim() }));
    }
    if x.is_certified_rational() {
        return Err(ExtrinsicError::RationalPoint);
    }
    let mut out = Vec::with_capacity(params.schedule.len());
    for &q in &params.schedule {
        let search = SearchParams { min_q0: q, ..params.search.clone() };
        let res = find_pair(x, &search)
            .map_err(ExtrinsicError::from)
            .and_then(|pair| progression_witness(x, oracle, &pair, params.n, q, params.search.precision));
        out.push(res);
    }
    Ok(out)
}

pub fn extrinsic_search_general(
    x: &TargetPoint,
    oracle: &dyn MembershipOracle,
    params: &GeneralParams,
) -> Result<Vec<Result<ExtrinsicWitness, ExtrinsicError>>, ExtrinsicError> {
    extrinsic_search_general_with(x, oracle, params, lattice::good_pair_search)
}

/// `n·x = m` with integer coefficients, `gcd(n, m) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerLine {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
}

impl IntegerLine {
    pub fn new(normal: Vec<BigInt>, offset: BigInt) -> Result<Self, ExtrinsicError> {
        if normal.iter().all(Zero::is_zero) {
            return Err(ExtrinsicError::BadParams("normal vector is zero"));
        }
        let g = normal.iter().fold(offset.abs(), |g, n| g.gcd(n));
        if !g.is_one() {
            return Err(ExtrinsicError::BadParams("line equation is not primitive"));
        }
        Ok(IntegerLine { normal, offset })
    }
}

/// `√n` as an exact scalar.
pub fn sqrt_int(n: &BigInt) -> QuadScalar {
    let (s, d) = squarefree_decompose(&n.magnitude().clone());
    let s = BigInt::from(s);
    match d.to_u64() {
        Some(1) => QuadScalar::from_rational(&BigRational::from_integer(s)),
        Some(d) => QuadScalar::new(BigInt::zero(), s, BigInt::one(), d).expect("squarefree radicand"),
        None => panic!("radicand exceeds u64"),
    }
}

/// `p/q` written over its least common denominator.
pub fn over_common_denominator(p: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let q = p.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let num = p.iter().map(|x| (x * BigRational::from_integer(q.clone())).to_integer()).collect();
    (num, q)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SegmentBound {
    /// `|n·p − m q|`, a positive integer.
    pub numerator: BigInt,
    pub q: BigInt,
    /// `‖n‖₂`.
    pub norm: QuadScalar,
    /// `dist(p/q, L) = numerator/(q‖n‖₂)`.
    pub distance: QuadScalar,
    /// `1/(q‖n‖₂)`.
    pub lower: QuadScalar,
}

/// Distance from a rational point off a rational line, with the integer
/// numerator that keeps it from being smaller than `1/(q‖n‖₂)`.
pub fn rational_segment_obstruction(line: &IntegerLine, p: &[BigRational]) -> Result<SegmentBound, ExtrinsicError> {
    if p.len() != line.normal.len() {
        return Err(ExtrinsicError::Lattice(LatticeError::DimensionMismatch { expected: line.normal.len(), got: p.len() }));
    }
    let (num, q) = over_common_denominator(p);
    let value = line.normal.iter().zip(&num).fold(BigInt::zero(), |acc, (n, x)| acc + n * x) - &line.offset * &q;
    if value.is_zero() {
        return Err(ExtrinsicError::OnLine);
    }
    let norm2 = line.normal.iter().fold(BigInt::zero(), |acc, n| acc + n * n);
    let norm = sqrt_int(&norm2);
    let qn = norm.mul_rational(&BigRational::from_integer(q.clone()));
    let numerator = value.abs();
    let distance = QuadScalar::from_rational(&BigRational::from_integer(numerator.clone())) / &qn;
    let lower = qn.recip().expect("nonzero");
    Ok(SegmentBound { numerator, q, norm, distance, lower })
}

/// `(a/c, b/c)` on the unit circle with `gcd(a, b, c) = 1`, `c ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CirclePoint {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl CirclePoint {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Option<Self> {
        let g = a.gcd(&b).gcd(&c);
        if c.is_zero() || g.is_zero() {
            return None;
        }
        let s = if c.is_negative() { -g } else { g };
        let (a, b, c) = (a / &s, b / &s, c / &s);
        (&a * &a + &b * &b == &c * &c).then_some(CirclePoint { a, b, c })
    }

    pub fn coords(&self) -> Vec<BigRational> {
        vec![BigRational::new(self.a.clone(), self.c.clone()), BigRational::new(self.b.clone(), self.c.clone())]
    }
}

/// Every rational point of the unit circle with denominator `≤ bound`,
/// sorted by `(c, a, b)`.
pub fn pythagorean_points(bound: u64) -> Vec<CirclePoint> {
    let mut out = BTreeSet::new();
    let mut push = |x: i64, y: i64, c: i64| {
        for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            for (u, v) in [(x, y), (y, x)] {
                out.insert((c, sx * u, sy * v));
            }
        }
    };
    if bound >= 1 {
        push(1, 0, 1);
    }
    let bound = bound.min(i64::MAX as u64) as i64;
    let mut s = 2i64;
    while s * s < bound.saturating_add(1) {
        for t in 1..s {
            let c = s * s + t * t;
            if c > bound {
                break;
            }
            if (s - t) % 2 == 1 && s.gcd(&t) == 1 {
                push(s * s - t * t, 2 * s * t, c);
            }
        }
        s += 1;
    }
    out.into_iter().map(|(c, a, b)| CirclePoint { a: a.into(), b: b.into(), c: c.into() }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleBound {
    /// `|‖p‖₂² − q²|`, a positive integer.
    pub numerator: BigInt,
    pub q: BigInt,
    /// `‖p/q‖₂`.
    pub radius: QuadScalar,
    /// `|‖p/q‖₂ − 1|`, the distance to the circle.
    pub distance: QuadScalar,
    /// `numerator/(q²(‖p/q‖₂ + 1))`, equal to `distance`.
    pub bound: QuadScalar,
    /// `1/(q²(‖p/q‖₂ + 1))`.
    pub lower: QuadScalar,
}

/// Distance from a rational point to the unit circle through
/// `|r − 1| = |r² − 1|/(r + 1)`.
pub fn circle_exclusion(p: &[BigRational]) -> Result<CircleBound, ExtrinsicError> {
    if p.len() != 2 {
        return Err(ExtrinsicError::Lattice(LatticeError::DimensionMismatch { expected: 2, got: p.len() }));
    }
    let (num, q) = over_common_denominator(p);
    let n2 = &num[0] * &num[0] + &num[1] * &num[1];
    let q2 = &q * &q;
    let diff = &n2 - &q2;
    if diff.is_zero() {
        return Err(ExtrinsicError::OnCircle);
    }
    let radius = sqrt_int(&n2).mul_rational(&BigRational::new(BigInt::one(), q.clone()));
    let one = QuadScalar::from_int(1);
    let distance = (&radius - &one).abs();
    let den = (&radius + &one).mul_rational(&BigRational::from_integer(q2));
    let numerator = diff.abs();
    let bound = QuadScalar::from_rational(&BigRational::from_integer(numerator.clone())) / &den;
    let lower = den.recip().expect("positive");
    Ok(CircleBound { numerator, q, radius, distance, bound, lower })
}

/// A point of the circle, exactly.
pub fn circle_target(x: &TargetPoint) -> Result<Vec<QuadScalar>, ExtrinsicError> {
    let xs = x.exact().ok_or(ExtrinsicError::NotOnCircle)?;
    if xs.len() != 2 {
        return Err(ExtrinsicError::NotOnCircle);
    }
    let r2 = xs[0].try_mul(&xs[0]).and_then(|a| a.try_add(&xs[1].try_mul(&xs[1])?));
    match r2 {
        Ok(v) if v == QuadScalar::from_int(1) => Ok(xs),
        _ => Err(ExtrinsicError::NotOnCircle),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusHit {
    pub p: Vec<BigInt>,
    pub q: BigInt,
    pub on_circle: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusCounts {
    pub intrinsic: u64,
    pub extrinsic: u64,
    /// Extrinsic hits with `q > threshold`.
    pub extrinsic_beyond: u64,
    pub threshold: u64,
    pub hits: Vec<CensusHit>,
    /// Extrinsic hits whose exclusion bound exceeds `√2·‖x − p/q‖_max`;
    /// always empty unless something is broken.
    pub exclusion_violations: Vec<CensusHit>,
}

/// Counts reduced `p/q ≠ x` with `q ≤ q_max` and
/// `‖x − p/q‖_max < q^{−(1+c)}`, split by whether `p/q` is on the circle.
///
/// For `c ≥ 0` such `p_j` must be `⌊q x_j⌋` or `⌈q x_j⌉`, so checking those
/// candidates at each `q` is a complete enumeration.
pub fn psi_census(x: &TargetPoint, c: &BigRational, q_max: u64, threshold: u64) -> Result<CensusCounts, ExtrinsicError> {
    if !c.is_positive() {
        return Err(ExtrinsicError::BadParams("exponent c must be positive"));
    }
    let xs = circle_target(x)?;
    let (cn, cd) = (c.numer().to_u32(), c.denom().to_u32());
    let (Some(cn), Some(cd)) = (cn, cd) else { return Err(ExtrinsicError::BadParams("exponent too large")) };
    let mut counts = CensusCounts {
        intrinsic: 0,
        extrinsic: 0,
        extrinsic_beyond: 0,
        threshold,
        hits: Vec::new(),
        exclusion_violations: Vec::new(),
    };
    let one = QuadScalar::from_int(1);
    let root2 = QuadScalar::sqrt(2).expect("squarefree");
    for qi in 1..=q_max {
        let q = BigInt::from(qi);
        let qr = BigRational::from_integer(q.clone());
        let cand: Vec<Vec<(BigInt, QuadScalar)>> = xs
            .iter()
            .map(|x| {
                let qx = x.mul_rational(&qr);
                let f = qx.floor();
                let mut v = vec![f.clone()];
                if QuadScalar::from_rational(&BigRational::from_integer(f.clone())) != qx {
                    v.push(f + 1);
                }
                // |q x − p|^{den}·q^{num} < 1 ⟺ |x − p/q| < q^{−(1+c)}
                v.into_iter()
                    .map(|p| {
                        let dev = qx.add_rational(&-BigRational::from_integer(p.clone())).abs();
                        (p, dev)
                    })
                    .filter(|(_, dev)| dev.pow(cd).mul_rational(&num_traits::pow(qr.clone(), cn as usize)) < one)
                    .collect()
            })
            .collect();
        for (p0, d0) in &cand[0] {
            for (p1, d1) in &cand[1] {
                if !p0.gcd(p1).gcd(&q).is_one() || (d0.is_zero() && d1.is_zero()) {
                    continue;
                }
                let on = p0 * p0 + p1 * p1 == &q * &q;
                let hit = CensusHit { p: vec![p0.clone(), p1.clone()], q: q.clone(), on_circle: on };
                if on {
                    counts.intrinsic += 1;
                } else {
                    counts.extrinsic += 1;
                    if qi > threshold {
                        counts.extrinsic_beyond += 1;
                    }
                    let pt = [BigRational::new(p0.clone(), q.clone()), BigRational::new(p1.clone(), q.clone())];
                    let bound = circle_exclusion(&pt)?.bound;
                    let maxdev = (if d0 > d1 { d0 } else { d1 }).mul_rational(&qr.recip());
                    if bound > &root2 * &maxdev {
                        counts.exclusion_violations.push(hit.clone());
                    }
                }
                counts.hits.push(hit);
            }
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int, DigitGenerator, DigitStream};
    use crate::ifs::{cantor, sierpinski_right};
    use proptest::prelude::*;

    fn tm() -> Coordinate {
        Coordinate::Digits(DigitStream::new(3, DigitGenerator::ThueMorse(0, 2)).unwrap())
    }

    fn seeded(seed: u64) -> Coordinate {
        Coordinate::Digits(DigitStream::new(3, DigitGenerator::Seeded { seed, alphabet: vec![0, 2] }).unwrap())
    }

    #[test]
    fn cantor_thue_morse() {
        let params = CantorSearchParams::new(40, 8);
        let res = extrinsic_search_cantor(&tm(), &params).unwrap();
        assert_eq!(res.levels.len(), 40);
        assert!(res.all_intrinsic.is_empty());
        let bound = rat_int(81);
        let x = TargetPoint::scalar(tm());
        for l in &res.levels {
            let w = l.best.as_ref().unwrap();
            assert!(l.within_bound, "level {}", l.n);
            assert!(w.quality.lo() <= &bound);
            assert!(w.verify(&x, &CantorOracle));
            // b = a_n is the convergent: quality below 1
            let conv = &l.rows[0];
            assert_eq!(conv.b, conv.a_n);
            assert!(conv.quality.hi() < &rat_int(1));
        }
        let top = res.profile.max_min_quality().unwrap();
        assert!(top.hi() <= &bound);
    }

    #[test]
    fn semiconvergents_oracle() {
        // independent recomputation of the level-3 window from the partials
        let x = tm();
        let partials = cantor_partials(&x, 5, 4096).unwrap();
        let level = cantor_level(&x, &partials, 3, 4, 32, 4096).unwrap();
        for row in &level.rows {
            let mut cf: Vec<BigInt> = partials[..2].to_vec();
            cf.push(row.b.clone());
            let mut v = BigRational::zero();
            for a in cf.iter().rev() {
                v = (BigRational::from_integer(a.clone()) + v).recip();
            }
            assert_eq!(v, BigRational::new(row.p.clone(), row.q.clone()));
            let mut digits_in = true;
            let mut num: BigInt = &row.p * BigInt::from(3);
            for _ in 0..64 {
                let (dgt, rem) = num.div_rem(&row.q);
                if dgt == BigInt::from(1) {
                    digits_in = rem.is_zero();
                    break;
                }
                num = rem * BigInt::from(3);
            }
            assert_eq!(row.inside, digits_in);
        }
    }

    #[test]
    fn cantor_rejects_rational_and_foreign_targets() {
        let params = CantorSearchParams::new(5, 8);
        let quarter = Coordinate::Rational(rat(1, 4));
        assert_eq!(extrinsic_search_cantor(&quarter, &params), Err(ExtrinsicError::RationalPoint));
        let periodic = Coordinate::Digits(DigitStream::new(3, DigitGenerator::Periodic(vec![0, 2])).unwrap());
        assert_eq!(extrinsic_search_cantor(&periodic, &params), Err(ExtrinsicError::RationalPoint));
        let binary = Coordinate::Digits(DigitStream::new(2, DigitGenerator::ThueMorse(0, 1)).unwrap());
        assert_eq!(extrinsic_search_cantor(&binary, &params), Err(ExtrinsicError::NotCantorTarget));
    }

    #[test]
    fn widening_is_recorded() {
        // window 0 only tests the convergent, which may well be in K
        let x = seeded(3);
        let partials = cantor_partials(&x, 12, 4096).unwrap();
        for n in 1..=12 {
            let l = cantor_level(&x, &partials, n, 0, 64, 4096).unwrap();
            assert_eq!(l.widened_from.is_empty(), !l.rows[0].inside);
            assert!(l.best.is_some());
        }
    }

    #[test]
    fn general_on_cantor() {
        let x = TargetPoint::scalar(tm());
        let params = GeneralParams { n: 8, schedule: vec![100, 1000, 10_000], search: SearchParams::default() };
        let res = extrinsic_search_general(&x, &CantorOracle, &params).unwrap();
        let bound = rat_int(17 * 17);
        for (w, q) in res.iter().zip([100u64, 1000, 10_000]) {
            let w = w.as_ref().unwrap();
            assert!(w.approx.q >= BigInt::from(q));
            assert!(quality_le(&x, &w.approx, &bound, 4096).unwrap());
            assert!(w.verify(&x, &CantorOracle));
            let Provenance::Progression { i, .. } = w.provenance else { panic!() };
            assert!((8..=16).contains(&i));
        }
    }

    #[test]
    fn general_with_zero_window() {
        let x = TargetPoint::scalar(tm());
        let params = GeneralParams { n: 0, schedule: vec![50], search: SearchParams::default() };
        let res = extrinsic_search_general(&x, &CantorOracle, &params).unwrap();
        let pair = lattice::good_pair_search(&x, &SearchParams::with_min_q0(50)).unwrap();
        match &res[0] {
            Ok(w) => assert_eq!(w.approx, pair.r0),
            Err(e) => assert_eq!(*e, ExtrinsicError::WindowExhausted { q_min: 50, inside: 1, unknown: 0 }),
        }
    }

    #[test]
    fn general_on_a_rational_segment() {
        // x = (α, 0) with α irrational lies on the base edge of the Sierpinski
        // triangle, so every progression point with second coordinate 0 and
        // first in [0, 1] is inside.
        let alpha = Coordinate::Quadratic(QuadScalar::new((-1).into(), 1.into(), 2.into(), 5).unwrap());
        let x = TargetPoint::new(vec![alpha, Coordinate::Rational(rat(0, 1))]).unwrap();
        let oracle = IfsOracle { ifs: sierpinski_right(), budget: MembershipBudget { max_depth: 64, max_states: 5000 } };
        let params = GeneralParams { n: 2, schedule: vec![1000, 10_000], search: SearchParams::default() };
        let res = extrinsic_search_general(&x, &oracle, &params).unwrap();
        for r in res {
            assert!(matches!(r, Err(ExtrinsicError::WindowExhausted { .. })), "{r:?}");
        }
    }

    #[test]
    fn general_rejects_rational() {
        let x = TargetPoint::scalar(Coordinate::Rational(rat(1, 4)));
        let params = GeneralParams { n: 2, schedule: vec![10], search: SearchParams::default() };
        assert_eq!(extrinsic_search_general(&x, &CantorOracle, &params), Err(ExtrinsicError::RationalPoint));
    }

    #[test]
    fn ifs_oracle_matches_ternary() {
        let o = IfsOracle { ifs: cantor(), budget: MembershipBudget::default() };
        for (n, d) in [(1, 4), (1, 2), (1, 3), (5, 7), (2, 9)] {
            let p = [rat(n, d)];
            let a = o.classify(&p);
            let b = CantorOracle.classify(&p);
            assert_eq!(matches!(a, OracleVerdict::In), matches!(b, OracleVerdict::In));
            if let OracleVerdict::Out(c) = a {
                assert!(o.reverify_out(&p, &c));
            }
        }
    }

    #[test]
    fn segment_examples() {
        let yaxis0 = IntegerLine::new(vec![0.into(), 1.into()], 0.into()).unwrap();
        let b = rational_segment_obstruction(&yaxis0, &[rat(1, 3), rat(1, 5)]).unwrap();
        assert_eq!(b.numerator, BigInt::from(3));
        assert_eq!(b.q, BigInt::from(15));
        assert_eq!(b.distance, QuadScalar::from_rational(&rat(1, 5)));
        assert_eq!(b.lower, QuadScalar::from_rational(&rat(1, 15)));
        assert_eq!(rational_segment_obstruction(&yaxis0, &[rat(5, 7), rat(0, 1)]), Err(ExtrinsicError::OnLine));
        let diag = IntegerLine::new(vec![1.into(), 1.into()], 1.into()).unwrap();
        let b = rational_segment_obstruction(&diag, &[rat(1, 2), rat(1, 3)]).unwrap();
        let expect = (QuadScalar::sqrt(2).unwrap().mul_rational(&rat(6, 1))).recip().unwrap();
        assert_eq!(b.numerator, BigInt::one());
        assert_eq!(b.distance, expect);
        assert_eq!(b.lower, expect);
        assert!(IntegerLine::new(vec![2.into(), 2.into()], 2.into()).is_err());
    }

    #[test]
    fn pythagorean_examples() {
        let p1 = pythagorean_points(1);
        assert_eq!(p1.len(), 4);
        let p5 = pythagorean_points(5);
        assert_eq!(p5.len(), 12);
        assert!(p5.contains(&CirclePoint::new((-3).into(), 4.into(), 5.into()).unwrap()));
        assert!(p5.contains(&CirclePoint::new(4.into(), (-3).into(), 5.into()).unwrap()));
        let p13 = pythagorean_points(13);
        assert!(p13.contains(&CirclePoint::new(5.into(), 12.into(), 13.into()).unwrap()));
        assert!(p13.contains(&CirclePoint::new((-12).into(), (-5).into(), 13.into()).unwrap()));
    }

    #[test]
    fn pythagorean_matches_exhaustive_search() {
        for bound in [1u64, 5, 13, 50, 120] {
            let mut brute = Vec::new();
            for c in 1..=bound as i64 {
                for a in -c..=c {
                    for b in -c..=c {
                        if a * a + b * b == c * c && a.gcd(&b).gcd(&c) == 1 {
                            brute.push(CirclePoint { a: a.into(), b: b.into(), c: c.into() });
                        }
                    }
                }
            }
            brute.sort_by(|x, y| (&x.c, &x.a, &x.b).cmp(&(&y.c, &y.a, &y.b)));
            assert_eq!(pythagorean_points(bound), brute, "bound {bound}");
        }
    }

    #[test]
    fn circle_examples() {
        let b = circle_exclusion(&[rat(3, 5), rat(3, 5)]).unwrap();
        assert_eq!(b.numerator, BigInt::from(7));
        let exact = QuadScalar::new(5.into(), (-3).into(), 5.into(), 2).unwrap();
        assert_eq!(b.distance, exact);
        assert_eq!(b.bound, exact);
        assert!((b.distance.to_f64() - 0.15147).abs() < 1e-5);
        assert_eq!(circle_exclusion(&[rat(3, 5), rat(4, 5)]), Err(ExtrinsicError::OnCircle));
        let b = circle_exclusion(&[rat(1, 2), rat(1, 2)]).unwrap();
        let exact = QuadScalar::new(2.into(), (-1).into(), 2.into(), 2).unwrap();
        assert_eq!(b.distance, exact);
        assert_eq!(b.bound, exact);
        let outside = circle_exclusion(&[rat(1, 1), rat(1, 1)]).unwrap();
        assert_eq!(outside.distance, QuadScalar::sqrt(2).unwrap() - QuadScalar::from_int(1));
    }

    fn circle_pt(a: i64, b: i64, c: i64) -> TargetPoint {
        TargetPoint::new(vec![Coordinate::Rational(rat(a, c)), Coordinate::Rational(rat(b, c))]).unwrap()
    }

    #[test]
    fn census_examples() {
        let x = circle_pt(3, 4, 5);
        let c = psi_census(&x, &rat_int(2), 10_000, 3).unwrap();
        assert_eq!(c.extrinsic_beyond, 0);
        assert!(c.exclusion_violations.is_empty());
        assert!(c.hits.iter().all(|h| h.p != vec![BigInt::from(3), BigInt::from(4)] || h.q != BigInt::from(5)));
        let c = psi_census(&x, &rat(1, 10), 100, 3).unwrap();
        assert!(c.extrinsic > 0);
        assert!(c.exclusion_violations.is_empty());
        let h = QuadScalar::sqrt(2).unwrap().mul_rational(&rat(1, 2));
        let irr = TargetPoint::new(vec![Coordinate::Quadratic(h.clone()), Coordinate::Quadratic(h)]).unwrap();
        let c = psi_census(&irr, &rat_int(2), 0, 3).unwrap();
        assert_eq!((c.intrinsic, c.extrinsic), (0, 0));
        assert!(matches!(psi_census(&circle_pt(1, 1, 2), &rat_int(2), 10, 3), Err(ExtrinsicError::NotOnCircle)));
    }

    #[test]
    fn census_intrinsic_hits_are_pythagorean() {
        let h = QuadScalar::sqrt(2).unwrap().mul_rational(&rat(1, 2));
        let irr = TargetPoint::new(vec![Coordinate::Quadratic(h.clone()), Coordinate::Quadratic(h)]).unwrap();
        let c = psi_census(&irr, &rat(1, 2), 400, 3).unwrap();
        let pyth = pythagorean_points(400);
        for hit in c.hits.iter().filter(|h| h.on_circle) {
            let cp = CirclePoint::new(hit.p[0].clone(), hit.p[1].clone(), hit.q.clone()).unwrap();
            assert!(pyth.contains(&cp));
        }
        assert!(c.exclusion_violations.is_empty());
    }

    #[test]
    fn profile_buckets_partition() {
        let x = TargetPoint::scalar(tm());
        let mk = |p: i64, q: i64| {
            let r = ApproxVector::new(vec![p.into()], q.into());
            let (quality, precision) = certify_quality(&x, &r, 256);
            ExtrinsicWitness {
                approx: r,
                out: OutCertificate::Ternary,
                quality,
                precision,
                provenance: Provenance::Semiconvergent { n: 1, b: 1.into() },
            }
        };
        let ws = vec![mk(1, 2), mk(3, 7), mk(12, 29), mk(41, 99)];
        let prof = ScaleProfile::build(&ws, &BigInt::from(2), &BigInt::from(99), 10);
        assert_eq!(prof.buckets.len(), 2);
        assert_eq!(prof.buckets[0].lo, BigInt::from(2));
        assert!(prof.buckets.windows(2).all(|w| w[0].hi == w[1].lo));
        assert!(prof.buckets.last().unwrap().hi > BigInt::from(99));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn segment_bound_is_sound(n0 in -20i64..20, n1 in -20i64..20, m in -20i64..20,
                                  a in -500i64..500, b in 1i64..300, c in -500i64..500, d in 1i64..300) {
            let g = n0.gcd(&n1).gcd(&m);
            prop_assume!(g != 0 && (n0 != 0 || n1 != 0));
            let line = IntegerLine::new(vec![(n0 / g).into(), (n1 / g).into()], (m / g).into()).unwrap();
            let p = [rat(a, b), rat(c, d)];
            match rational_segment_obstruction(&line, &p) {
                Err(ExtrinsicError::OnLine) => {
                    prop_assert_eq!(rat(a * n0 / g, b) + rat(c * n1 / g, d), rat_int(m / g));
                }
                Ok(bd) => {
                    prop_assert!(bd.numerator >= BigInt::one());
                    prop_assert!(bd.distance >= bd.lower);
                    // squared distance by projection onto the normal
                    let nn = rat_int((n0 * n0 + n1 * n1) / (g * g));
                    let v = rat(a * n0 / g, b) + rat(c * n1 / g, d) - rat_int(m / g);
                    prop_assert_eq!(bd.distance.pow(2), QuadScalar::from_rational(&(&v * &v / nn)));
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn circle_bound_is_tight(a in -300i64..300, b in -300i64..300, q in 1i64..200) {
            let p = [rat(a, q), rat(b, q)];
            match circle_exclusion(&p) {
                Err(ExtrinsicError::OnCircle) => prop_assert_eq!(rat(a, q) * rat(a, q) + rat(b, q) * rat(b, q), rat_int(1)),
                Ok(bd) => {
                    prop_assert_eq!(&bd.bound, &bd.distance);
                    prop_assert!(bd.bound >= bd.lower);
                    prop_assert!(bd.numerator >= BigInt::one());
                    // (r − 1)² from r² without the identity
                    let r2 = rat(a, q) * rat(a, q) + rat(b, q) * rat(b, q);
                    let r = &bd.radius;
                    prop_assert_eq!(r.pow(2), QuadScalar::from_rational(&r2));
                    prop_assert_eq!(bd.distance.pow(2), QuadScalar::from_rational(&(r2 + rat_int(1))) - r.mul_rational(&rat_int(2)));
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
