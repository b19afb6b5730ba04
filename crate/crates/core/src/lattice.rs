//! Good pairs of simultaneous approximations and the progressions they span.
//!
//! For `x ∈ R^d` the lattice `g_t T_x Z^{d+1}` with
//! `T_x(p, q) = (p − q x, q)` and `g_t = diag(e^{t/d}, …, e^{t/d}, e^{−t})`
//! has a vector in the unit cube exactly when some `(p, q)` has
//! `q ≤ e^t` and `‖q x − p‖ ≤ e^{−t/d}`. Writing `H = e^t`, a vector
//! *survives at height `H`* when `q ≤ H` and `‖q x − p‖^d ≤ 1/H`, and two
//! independent survivors bound the second minimum by one. The search finds
//! the least integer height where that happens.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{
    cmp_abs_affine_pow, enclose_abs_affine, floor_root, rat_ceil, rat_floor, Coordinate, PrecisionExhausted,
    RationalInterval, TargetPoint, DEFAULT_MAX_PRECISION,
};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error("no two independent survivors up to height cap {cap}")]
    HeightCapExceeded { cap: u64 },
    #[error("target is rational, so good pairs cannot recur")]
    RationalPoint,
    #[error("invalid search parameters: {0}")]
    BadParams(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Undecidable(#[from] PrecisionExhausted),
}

/// `r = (p, q) ∈ Z^{d+1}`, read as the rational point `p/q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ApproxVector {
    pub p: Vec<BigInt>,
    pub q: BigInt,
}

impl ApproxVector {
    pub fn new(p: Vec<BigInt>, q: BigInt) -> Self {
        ApproxVector { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero() && self.p.iter().all(Zero::is_zero)
    }

    fn entries(&self) -> impl Iterator<Item = &BigInt> {
        self.p.iter().chain(core::iter::once(&self.q))
    }

    /// `self + k·other`.
    pub fn add_scaled(&self, other: &Self, k: &BigInt) -> Self {
        ApproxVector {
            p: self.p.iter().zip(&other.p).map(|(a, b)| a + k * b).collect(),
            q: &self.q + k * &other.q,
        }
    }

    /// Linear independence over `Q`: some 2×2 minor is nonzero.
    pub fn independent_of(&self, other: &Self) -> bool {
        let a: Vec<&BigInt> = self.entries().collect();
        let b: Vec<&BigInt> = other.entries().collect();
        (0..a.len()).any(|i| (i + 1..a.len()).any(|j| a[i] * b[j] != a[j] * b[i]))
    }

    /// The point `p/q`, when `q ≠ 0`.
    pub fn point(&self) -> Option<Vec<BigRational>> {
        if self.q.is_zero() {
            return None;
        }
        Some(self.p.iter().map(|p| BigRational::new(p.clone(), self.q.clone())).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Zero,
    Infinity,
}

/// One certified inequality `|q_i x_j − p_{ij}|^d ≤ 1/q_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualCheck {
    pub slot: Slot,
    pub coord: usize,
    /// Enclosure of `|q_i x_j − p_{ij}|`.
    pub residual: RationalInterval,
    /// The outcome of the exact comparison against `1/q_0`.
    pub ordering: Ordering,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodPairWitness {
    /// Height at which both vectors survived.
    pub height: u64,
    pub checks: Vec<ResidualCheck>,
}

/// Two independent approximations `r_0`, `r_∞` with `0 ≤ q_∞ ≤ q_0` and
/// `‖q_i x − p_i‖ ≤ q_0^{−1/d}` for both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodPair {
    pub r0: ApproxVector,
    pub r_inf: ApproxVector,
    pub d: usize,
    pub witness: GoodPairWitness,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PairViolation {
    #[error("vectors have dimension {0}, target has {1}")]
    Dimension(usize, usize),
    #[error("vectors are linearly dependent")]
    Dependent,
    #[error("ordering 0 ≤ q_inf ≤ q_0 fails")]
    Ordering,
    #[error("residual bound fails for {slot:?}, coordinate {coord}")]
    Residual { slot: Slot, coord: usize },
    #[error(transparent)]
    Undecidable(#[from] PrecisionExhausted),
}

impl GoodPair {
    /// Re-checks every defining inequality from scratch.
    pub fn verify(&self, x: &TargetPoint, cap: u32) -> Result<(), PairViolation> {
        verify_pair(x, &self.r0, &self.r_inf, cap)
    }
}

/// Checks `(r0, r_inf)` against the good-pair conditions for `x`.
pub fn verify_pair(x: &TargetPoint, r0: &ApproxVector, r_inf: &ApproxVector, cap: u32) -> Result<(), PairViolation> {
    let d = x.dim();
    for r in [r0, r_inf] {
        if r.dim() != d {
            return Err(PairViolation::Dimension(r.dim(), d));
        }
    }
    if !r0.independent_of(r_inf) {
        return Err(PairViolation::Dependent);
    }
    if r_inf.q.is_negative() || r_inf.q > r0.q || !r0.q.is_positive() {
        return Err(PairViolation::Ordering);
    }
    let bound = BigRational::new(BigInt::one(), r0.q.clone());
    for (slot, r) in [(Slot::Zero, r0), (Slot::Infinity, r_inf)] {
        let q = BigRational::from_integer(r.q.clone());
        for (j, c) in x.coords().iter().enumerate() {
            let p = BigRational::from_integer(r.p[j].clone());
            if cmp_abs_affine_pow(c, &q, &p, d as u32, &bound, cap)? == Ordering::Greater {
                return Err(PairViolation::Residual { slot, coord: j });
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchParams {
    /// Lower bound `Q` for both denominators.
    pub min_q0: u64,
    /// Height growth factor `ρ > 1`.
    pub rho: BigRational,
    /// Largest height scanned.
    pub cap: u64,
    /// Precision cap handed to exact comparisons.
    pub precision: u32,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            min_q0: 1,
            rho: BigRational::new(3.into(), 2.into()),
            cap: 1_000_000,
            precision: DEFAULT_MAX_PRECISION,
        }
    }
}

impl SearchParams {
    pub fn with_min_q0(min_q0: u64) -> Self {
        SearchParams { min_q0, ..Self::default() }
    }

    /// Heights `Q, ⌈ρQ⌉, ⌈ρ²Q⌉, …`, each at least one more than the last,
    /// ending with `cap` itself.
    pub fn heights(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut h = self.min_q0;
        while h <= self.cap {
            out.push(h);
            if h == self.cap {
                break;
            }
            let next = rat_ceil(&(&self.rho * BigInt::from(h))).to_u64().unwrap_or(u64::MAX);
            h = next.max(h + 1).min(self.cap);
        }
        out
    }

    fn validate(&self) -> Result<(), LatticeError> {
        if self.min_q0 == 0 {
            return Err(LatticeError::BadParams("min_q0 must be at least 1"));
        }
        if self.rho <= BigRational::one() {
            return Err(LatticeError::BadParams("rho must exceed 1"));
        }
        if self.cap >= 1 << 60 {
            return Err(LatticeError::BadParams("height cap must be below 2^60"));
        }
        Ok(())
    }
}

// fractional part of x_j scaled by 2^k, bracketed by integers
struct Bracket {
    int: BigInt,
    lo: i128,
    hi: i128,
}

/// A vector `(p, q)` with `p` the nearest integer vector to `q·x` and
/// `‖q x − p‖^d ≤ 1/q`, so it survives at its own height `q`.
///
/// Survival at height `h` is monotone: a candidate survives at every height
/// from `q` up to some last height and never again.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub r: ApproxVector,
    // scaled residual brackets |q x_j − p_j|·2^k
    rlo: Vec<i128>,
    rhi: Vec<i128>,
}

/// Fixed-point data for scanning one target.
///
/// Each coordinate's fractional part is bracketed by integers over `2^k`
/// with `k` chosen so that `q·2^k` fits comfortably in an `i128`. Anything
/// the brackets cannot settle is decided exactly.
pub struct HeightPlan<'a> {
    x: &'a TargetPoint,
    k: u32,
    brackets: Vec<Bracket>,
    min_q: u64,
    precision: u32,
}

enum Rounded {
    Known { m: i128, rlo: i128, rhi: i128 },
    Ambiguous,
}

impl<'a> HeightPlan<'a> {
    fn new(x: &'a TargetPoint, params: &SearchParams) -> Self {
        let cap_bits = 64 - params.cap.leading_zeros();
        let k = 120 - cap_bits;
        let brackets = x.coords().iter().map(|c| bracket(c, k)).collect();
        HeightPlan { x, k, brackets, min_q: params.min_q0, precision: params.precision }
    }

    pub fn min_q(&self) -> u64 {
        self.min_q
    }

    fn round(&self, j: usize, q: i128) -> Rounded {
        let b = &self.brackets[j];
        let half = 1i128 << (self.k - 1);
        let mask = (1i128 << self.k) - 1;
        let a = q * b.lo + half;
        let c = q * b.hi + half;
        let m = a >> self.k;
        if m != c >> self.k || a & mask == 0 {
            return Rounded::Ambiguous;
        }
        let base = m << self.k;
        let (lo, hi) = (q * b.lo - base, q * b.hi - base);
        let (rlo, rhi) = if lo >= 0 {
            (lo, hi)
        } else if hi <= 0 {
            (-hi, -lo)
        } else {
            (0, hi.max(-lo))
        };
        Rounded::Known { m, rlo, rhi }
    }

    /// `T = ⌊(2^{kd}/h)^{1/d}⌋`: a scaled residual `R ≤ T` survives at `h`,
    /// one with `R ≥ T + 1` does not.
    fn threshold(&self, h: u64) -> i128 {
        let d = self.x.dim() as u32;
        let num = BigInt::one() << (self.k as usize * d as usize);
        floor_root(&(num / BigInt::from(h)), d).to_i128().expect("threshold fits in i128")
    }

    fn scaled_residual(&self, j: usize, q: &BigInt, p: &BigInt) -> (i128, i128) {
        let c = &self.x.coords()[j];
        let idx = match c {
            Coordinate::Digits(s) => (self.k + 8).div_ceil(s.base().ilog2()),
            _ => self.k / 4 + 4,
        };
        let iv = enclose_abs_affine(c, &BigRational::from_integer(q.clone()), &BigRational::from_integer(p.clone()), idx);
        let scale = BigInt::one() << self.k as usize;
        let lo = rat_floor(&(iv.lo() * &scale));
        let hi = rat_ceil(&(iv.hi() * &scale));
        (lo.to_i128().unwrap_or(i128::MAX), hi.to_i128().unwrap_or(i128::MAX))
    }

    /// Does `cand` survive at height `h ≥ q`, i.e. `‖q x − p‖^d ≤ 1/h`?
    fn survives(&self, cand: &Candidate, h: u64) -> Result<bool, LatticeError> {
        let d = self.x.dim();
        let limit = BigInt::one() << (self.k as usize * d);
        let h_big = BigInt::from(h);
        let mut undecided = Vec::new();
        for j in 0..d {
            let lo = num_traits::pow(BigInt::from(cand.rlo[j]), d) * &h_big;
            if lo > limit {
                return Ok(false);
            }
            let hi = num_traits::pow(BigInt::from(cand.rhi[j]), d) * &h_big;
            if hi > limit {
                undecided.push(j);
            }
        }
        let q = BigRational::from_integer(cand.r.q.clone());
        let bound = BigRational::new(BigInt::one(), h_big);
        for j in undecided {
            let p = BigRational::from_integer(cand.r.p[j].clone());
            if cmp_abs_affine_pow(&self.x.coords()[j], &q, &p, d as u32, &bound, self.precision)? == Ordering::Greater {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn candidate(&self, q: u64, t: i128) -> Result<Option<Candidate>, LatticeError> {
        let d = self.brackets.len();
        let qb = BigInt::from(q);
        let mut p = Vec::with_capacity(d);
        let mut rlo = Vec::with_capacity(d);
        let mut rhi = Vec::with_capacity(d);
        for j in 0..d {
            match self.round(j, q as i128) {
                Rounded::Known { m, rlo: lo, rhi: hi } => {
                    if lo > t {
                        return Ok(None);
                    }
                    p.push(&self.brackets[j].int * &qb + BigInt::from(m));
                    rlo.push(lo);
                    rhi.push(hi);
                }
                Rounded::Ambiguous => {
                    let pj = nearest_multiple(&self.x.coords()[j], &qb, self.precision)?;
                    let (lo, hi) = self.scaled_residual(j, &qb, &pj);
                    if lo > t {
                        return Ok(None);
                    }
                    p.push(pj);
                    rlo.push(lo);
                    rhi.push(hi);
                }
            }
        }
        let cand = Candidate { r: ApproxVector::new(p, qb), rlo, rhi };
        Ok(if self.survives(&cand, q)? { Some(cand) } else { None })
    }

    /// Candidates with `lo ≤ q ≤ hi` (and `q ≥ min_q`), in ascending `q`.
    /// Blocks are independent, so they can be scanned in parallel.
    pub fn candidates(&self, lo: u64, hi: u64) -> Result<Vec<Candidate>, LatticeError> {
        let lo = lo.max(self.min_q);
        if lo > hi {
            return Ok(Vec::new());
        }
        // anything surviving at its own height q ≥ lo passes this cut
        let t = self.threshold(lo);
        let mut out = Vec::new();
        for q in lo..=hi {
            if let Some(c) = self.candidate(q, t)? {
                out.push(c);
            }
        }
        Ok(out)
    }
}

fn bracket(c: &Coordinate, k: u32) -> Bracket {
    let (int, iv) = match (c.exact(), c) {
        (Some(v), _) => {
            let n = v.floor();
            let f = v.add_rational(&-BigRational::from_integer(n.clone()));
            (n, f.enclose(k + 8))
        }
        (None, Coordinate::Digits(s)) => {
            let per_digit = s.base().ilog2();
            (BigInt::zero(), s.enclose((k + 8).div_ceil(per_digit) as usize))
        }
        (None, _) => unreachable!("rational and quadratic coordinates are exact"),
    };
    let scale = BigInt::one() << k as usize;
    let lo = rat_floor(&(iv.lo() * &scale));
    let hi = rat_ceil(&(iv.hi() * &scale));
    Bracket { int, lo: lo.to_i128().expect("bracket fits"), hi: hi.to_i128().expect("bracket fits") }
}

/// The nearest integer to `q·x`, ties toward even.
pub fn nearest_multiple(x: &Coordinate, q: &BigInt, cap: u32) -> Result<BigInt, PrecisionExhausted> {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if let Some(v) = x.exact() {
        let y = v.mul_rational(&BigRational::from_integer(q.clone())).add_rational(&half);
        let m = y.floor();
        let tie = y.to_rational().is_some_and(|r| r.is_integer());
        return Ok(if tie && m.is_odd() { m - 1 } else { m });
    }
    let qr = BigRational::from_integer(q.clone());
    let mut k = 16u32.min(cap);
    loop {
        let iv = x.enclose(k).scale(&qr).shift(&half);
        let lo = rat_floor(iv.lo());
        if lo == rat_floor(iv.hi()) && !iv.lo().is_integer() {
            return Ok(lo);
        }
        if k >= cap {
            return Err(PrecisionExhausted { cap });
        }
        k = k.saturating_mul(2).min(cap);
    }
}

/// The first survivor, then the first later survivor independent of it.
/// The later one becomes `r_0`.
pub fn select_pair(survivors: &[ApproxVector]) -> Option<(ApproxVector, ApproxVector)> {
    let first = survivors.first()?;
    let second = survivors[1..].iter().find(|r| first.independent_of(r))?;
    Some((second.clone(), first.clone()))
}

/// Sequential good-pair search.
pub fn good_pair_search(x: &TargetPoint, params: &SearchParams) -> Result<GoodPair, LatticeError> {
    good_pair_search_with(x, params, |plan, lo, hi| plan.candidates(lo, hi))
}

/// Good-pair search at the least height `H ≥ Q` that has two independent
/// survivors with `q ≥ Q`.
///
/// Denominators are scanned in the blocks `(H_{k−1}, H_k]` of the height
/// schedule; `scan(plan, lo, hi)` must return [`HeightPlan::candidates`]
/// for the block, so callers may split it further and scan in parallel.
/// The least good height is always the denominator of some candidate, and
/// candidates stop surviving for good once they fail, so one pass in
/// ascending `q` with a shrinking live list finds it exactly.
pub fn good_pair_search_with<F>(x: &TargetPoint, params: &SearchParams, mut scan: F) -> Result<GoodPair, LatticeError>
where
    F: FnMut(&HeightPlan<'_>, u64, u64) -> Result<Vec<Candidate>, LatticeError>,
{
    params.validate()?;
    if x.is_certified_rational() {
        return Err(LatticeError::RationalPoint);
    }
    let plan = HeightPlan::new(x, params);
    let mut live: Vec<Candidate> = Vec::new();
    let mut lo = params.min_q0;
    for h in params.heights() {
        for cand in scan(&plan, lo, h)? {
            let q = cand.r.q.to_u64().expect("height fits in u64");
            let mut kept = Vec::with_capacity(live.len() + 1);
            for c in live {
                if plan.survives(&c, q)? {
                    kept.push(c);
                }
            }
            live = kept;
            live.push(cand);
            let survivors: Vec<ApproxVector> = live.iter().map(|c| c.r.clone()).collect();
            if let Some((r0, r_inf)) = select_pair(&survivors) {
                let witness = certify(x, &r0, &r_inf, q, params.precision)?;
                return Ok(GoodPair { r0, r_inf, d: x.dim(), witness });
            }
        }
        lo = h + 1;
    }
    Err(LatticeError::HeightCapExceeded { cap: params.cap })
}

fn certify(
    x: &TargetPoint,
    r0: &ApproxVector,
    r_inf: &ApproxVector,
    height: u64,
    cap: u32,
) -> Result<GoodPairWitness, LatticeError> {
    let d = x.dim() as u32;
    let bound = BigRational::new(BigInt::one(), r0.q.clone());
    let mut checks = Vec::new();
    for (slot, r) in [(Slot::Zero, r0), (Slot::Infinity, r_inf)] {
        let q = BigRational::from_integer(r.q.clone());
        for (j, c) in x.coords().iter().enumerate() {
            let p = BigRational::from_integer(r.p[j].clone());
            let ordering = cmp_abs_affine_pow(c, &q, &p, d, &bound, cap)?;
            // survivors at height h ≥ q_0 always pass; anything else is a bug
            assert_ne!(ordering, Ordering::Greater, "survivor failed re-verification");
            let residual = enclose_abs_affine(c, &q, &p, 64).round_outward(96);
            checks.push(ResidualCheck { slot, coord: j, residual, ordering });
        }
    }
    Ok(GoodPairWitness { height, checks })
}

/// The vectors `r_i = r_0 + i·r_∞` for `i = 0 … i_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Progression {
    pub r0: ApproxVector,
    pub r_inf: ApproxVector,
    pub entries: Vec<ApproxVector>,
}

impl Progression {
    pub fn new(r0: ApproxVector, r_inf: ApproxVector, i_max: usize) -> Self {
        let entries = (0..=i_max).map(|i| r0.add_scaled(&r_inf, &BigInt::from(i))).collect();
        Progression { r0, r_inf, entries }
    }

    /// `r_i` for any `i`, whether or not it is stored.
    pub fn entry(&self, i: u64) -> ApproxVector {
        match self.entries.get(i as usize) {
            Some(r) => r.clone(),
            None => self.r0.add_scaled(&self.r_inf, &BigInt::from(i)),
        }
    }

    pub fn i_max(&self) -> usize {
        self.entries.len() - 1
    }

    /// The points `p_i/q_i` for stored entries with `q_i > 0`.
    pub fn points(&self) -> Vec<(usize, Vec<BigRational>)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, r)| r.q.is_positive())
            .filter_map(|(i, r)| r.point().map(|p| (i, p)))
            .collect()
    }
}

pub fn make_progression(pair: &GoodPair, i_max: usize) -> Progression {
    Progression::new(pair.r0.clone(), pair.r_inf.clone(), i_max)
}

/// `‖x − p_i/q_i‖ ≤ ((1+i)/q_i)^{1+1/d}`, decided exactly as
/// `|q_i x_j − p_{ij}|^d ≤ (1+i)^{d+1}/q_i`.
pub fn claim23_certify(x: &TargetPoint, r: &ApproxVector, i: u64, cap: u32) -> Result<bool, PrecisionExhausted> {
    let d = x.dim() as u32;
    let bound = BigRational::new(num_traits::pow(BigInt::from(i + 1), (d + 1) as usize), r.q.clone());
    within(x, r, &bound, cap)
}

fn within(x: &TargetPoint, r: &ApproxVector, bound: &BigRational, cap: u32) -> Result<bool, PrecisionExhausted> {
    let d = x.dim() as u32;
    let q = BigRational::from_integer(r.q.clone());
    for (j, c) in x.coords().iter().enumerate() {
        let p = BigRational::from_integer(r.p[j].clone());
        if cmp_abs_affine_pow(c, &q, &p, d, bound, cap)? == Ordering::Greater {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Enclosure of `q^{1+1/d}·‖x − p/q‖ = q^{1/d}·max_j |q x_j − p_j|`.
///
/// `k` is the precision index for the target; `q^{1/d}` is enclosed to
/// `2k + 32` bits unless `q` is a perfect `d`-th power.
pub fn quality(x: &TargetPoint, r: &ApproxVector, k: u32) -> RationalInterval {
    assert!(r.q.is_positive(), "quality needs q ≥ 1");
    let d = x.dim() as u32;
    let q = BigRational::from_integer(r.q.clone());
    let mut res: Option<RationalInterval> = None;
    for (j, c) in x.coords().iter().enumerate() {
        let iv = enclose_abs_affine(c, &q, &BigRational::from_integer(r.p[j].clone()), k);
        res = Some(match res {
            None => iv,
            Some(m) => m.max(&iv),
        });
    }
    let res = res.expect("target has a coordinate");
    let root = floor_root(&r.q, d);
    let root_iv = if num_traits::pow(root.clone(), d as usize) == r.q {
        RationalInterval::point(BigRational::from_integer(root))
    } else {
        let bits = 2 * k + 32;
        let scaled = floor_root(&(&r.q << (bits as usize * d as usize)), d);
        let den = BigInt::one() << bits as usize;
        RationalInterval::new(BigRational::new(scaled.clone(), den.clone()), BigRational::new(scaled + 1, den))
    };
    &res * &root_iv
}

/// Exact test of `q^{1/d}·‖q x − p‖ ≤ c`, i.e. `|q x_j − p_j|^d ≤ c^d/q`.
pub fn quality_le(x: &TargetPoint, r: &ApproxVector, c: &BigRational, cap: u32) -> Result<bool, PrecisionExhausted> {
    let d = x.dim() as u32;
    let bound = num_traits::pow(c.clone(), d as usize) / BigRational::from_integer(r.q.clone());
    within(x, r, &bound, cap)
}
