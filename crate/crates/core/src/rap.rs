//! Roughly arithmetic progressions.
//!
//! A sequence `x_0 … x_N` on a line `L` is a `C`-RAP when some nonzero `v`
//! in the direction of `L` gives `(j−i)/C ≤ (x_j − x_i)/v ≤ C(j−i)` for all
//! `i < j`. Summing consecutive steps shows this is the same as asking the
//! points to be monotone along `L` with every consecutive gap within a
//! factor `C²` of every other, which is what the searches exploit.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{common_denominator, rat};

/// A point of `Q^d`.
pub type Point = Vec<BigRational>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RapError {
    #[error("points are not collinear")]
    NotCollinear,
    #[error("need at least {0} points")]
    TooFewPoints(usize),
    #[error("points have mixed dimensions")]
    DimensionMismatch,
    #[error("C must be at least 1")]
    BadConstant,
    #[error("the progression has zero increment")]
    DegenerateIncrement,
    #[error("search budget exhausted at length {}", .0.length)]
    BudgetExceeded(alloc::boxed::Box<RapSearch>),
}

fn sub(a: &Point, b: &Point) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale(a: &Point, s: &BigRational) -> Point {
    a.iter().map(|x| x * s).collect()
}

fn is_zero(a: &Point) -> bool {
    a.iter().all(Zero::is_zero)
}

/// The scalar `c` with `u = c·v`, if `u` is parallel to `v ≠ 0`.
pub fn ratio(u: &Point, v: &Point) -> Option<BigRational> {
    let k = v.iter().position(|x| !x.is_zero())?;
    let c = &u[k] / &v[k];
    u.iter().zip(v).enumerate().all(|(m, (a, b))| m == k || *a == &c * b).then_some(c)
}

/// Exact collinearity: every point lies on the line through the first two
/// distinct points.
pub fn collinear(points: &[Point]) -> bool {
    let Some((a, rest)) = points.split_first() else { return true };
    let Some(b) = rest.iter().find(|b| *b != a) else { return true };
    let u = sub(b, a);
    rest.iter().all(|c| {
        let w = sub(c, a);
        (0..u.len()).all(|i| (i + 1..u.len()).all(|j| &u[i] * &w[j] == &u[j] * &w[i]))
    })
}

/// `x_0 … x_N` with an increment `v` and the table `c_{ij} = (x_j − x_i)/v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RapCertificate {
    pub points: Vec<Point>,
    pub increment: Point,
    pub c: BigRational,
    /// `ratios[i][j − i − 1] = c_{ij}` for `i < j`.
    pub ratios: Vec<Vec<BigRational>>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RapViolation {
    #[error("increment is zero")]
    ZeroIncrement,
    #[error("x_{j} − x_{i} is not a multiple of the increment")]
    NotParallel { i: usize, j: usize },
    #[error("stored ratio c_{i}{j} is wrong")]
    WrongRatio { i: usize, j: usize },
    #[error("c_{i}{j} is outside [(j−i)/C, C(j−i)]")]
    OutOfRange { i: usize, j: usize },
    #[error("ratio table has the wrong shape")]
    Shape,
}

impl RapCertificate {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ratio(&self, i: usize, j: usize) -> &BigRational {
        &self.ratios[i][j - i - 1]
    }

    /// Recomputes every ratio and checks every inequality.
    pub fn verify(&self) -> Result<(), RapViolation> {
        self.verify_with(&self.c)
    }

    /// As [`verify`](Self::verify) but against another constant.
    pub fn verify_with(&self, c: &BigRational) -> Result<(), RapViolation> {
        if is_zero(&self.increment) {
            return Err(RapViolation::ZeroIncrement);
        }
        let n = self.points.len();
        if self.ratios.len() != n || self.ratios.iter().enumerate().any(|(i, r)| r.len() != n - i - 1) {
            return Err(RapViolation::Shape);
        }
        for i in 0..n {
            for j in i + 1..n {
                let got = ratio(&sub(&self.points[j], &self.points[i]), &self.increment)
                    .ok_or(RapViolation::NotParallel { i, j })?;
                if got != *self.ratio(i, j) {
                    return Err(RapViolation::WrongRatio { i, j });
                }
            }
        }
        self.check_ranges(c)
    }

    /// Only the inequalities `(j−i)/C ≤ c_ij ≤ C(j−i)` on the stored ratios.
    fn check_ranges(&self, c: &BigRational) -> Result<(), RapViolation> {
        let n = self.points.len();
        // bounds per gap j − i
        let bounds: Vec<(BigRational, BigRational)> = (0..n)
            .map(|k| {
                let k = BigRational::from_integer(BigInt::from(k));
                (&k / c, c * &k)
            })
            .collect();
        for i in 0..n {
            for j in i + 1..n {
                let (lo, hi) = &bounds[j - i];
                let got = self.ratio(i, j);
                if got < lo || got > hi {
                    return Err(RapViolation::OutOfRange { i, j });
                }
            }
        }
        Ok(())
    }

    /// The image under `t ↦ αt + β`, with increment `αv`.
    pub fn map_affine(&self, alpha: &BigRational, beta: &Point) -> RapCertificate {
        let points = self.points.iter().map(|p| p.iter().zip(beta).map(|(x, b)| alpha * x + b).collect()).collect();
        RapCertificate {
            points,
            increment: scale(&self.increment, alpha),
            c: self.c.clone(),
            ratios: self.ratios.clone(),
        }
    }
}

fn build(points: &[Point], v: Point, c: &BigRational) -> Option<RapCertificate> {
    if is_zero(&v) {
        return None;
    }
    let n = points.len();
    let mut ratios = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n - i - 1);
        for j in i + 1..n {
            row.push(ratio(&sub(&points[j], &points[i]), &v)?);
        }
        ratios.push(row);
    }
    let cert = RapCertificate { points: points.to_vec(), increment: v, c: c.clone(), ratios };
    // the ratios were just computed from the points
    cert.check_ranges(c).is_ok().then_some(cert)
}

fn check_input(points: &[Point], c: &BigRational, min: usize) -> Result<(), RapError> {
    if points.len() < min {
        return Err(RapError::TooFewPoints(min));
    }
    if points.iter().any(|p| p.len() != points[0].len()) {
        return Err(RapError::DimensionMismatch);
    }
    if *c < BigRational::one() {
        return Err(RapError::BadConstant);
    }
    Ok(())
}

/// Certificate that `points` (in the given order) form a `C`-RAP.
pub fn rap_check(points: &[Point], c: &BigRational) -> Result<Option<RapCertificate>, RapError> {
    rap_check_with(points, c, None)
}

/// As [`rap_check`], trying the increment `hint` first.
///
/// With `w = x_1 − x_0` and `r_{ij} = c_{ij}(w)/(j−i)`, the increment
/// `s·w` works exactly when `max r/C ≤ s ≤ C·min r`. The checker tries the
/// hint, then `s = 1`, then the midpoint of that interval.
pub fn rap_check_with(points: &[Point], c: &BigRational, hint: Option<&Point>) -> Result<Option<RapCertificate>, RapError> {
    check_input(points, c, 2)?;
    if !collinear(points) {
        return Err(RapError::NotCollinear);
    }
    let w = sub(&points[1], &points[0]);
    if is_zero(&w) {
        return Ok(None);
    }
    let n = points.len();
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for i in 0..n {
        for j in i + 1..n {
            let r = ratio(&sub(&points[j], &points[i]), &w).expect("collinear") / BigRational::from_integer(BigInt::from(j - i));
            if !r.is_positive() {
                return Ok(None);
            }
            let l = &r / c;
            let h = &r * c;
            if lo.as_ref().is_none_or(|x| l > *x) {
                lo = Some(l);
            }
            if hi.as_ref().is_none_or(|x| h < *x) {
                hi = Some(h);
            }
        }
    }
    let (lo, hi) = (lo.unwrap(), hi.unwrap());
    if lo > hi {
        return Ok(None);
    }
    if let Some(v) = hint {
        if let Some(cert) = build(points, v.clone(), c) {
            return Ok(Some(cert));
        }
    }
    let one = BigRational::one();
    let s = if lo <= one && one <= hi { one } else { (&lo + &hi) / BigRational::from_integer(2.into()) };
    let cert = build(points, scale(&w, &s), c).expect("feasible scale certifies");
    Ok(Some(cert))
}

/// The points `p_i/q_i`, `i = N … 2N`, of `r_i = r_0 + i·r_∞`, with the
/// increment `v = (q_0 p_∞ − q_∞ p_0)/(q_N q_{2N})` and `C = 2`. Then
/// `c_{ij} = (j−i)·q_N q_{2N}/(q_i q_j)`.
pub fn prop26_family(
    p0: &[BigInt],
    q0: &BigInt,
    p_inf: &[BigInt],
    q_inf: &BigInt,
    n: usize,
) -> Result<RapCertificate, RapError> {
    if p0.len() != p_inf.len() {
        return Err(RapError::DimensionMismatch);
    }
    let q = |i: usize| q0 + q_inf * BigInt::from(i);
    if (n..=2 * n).any(|i| !q(i).is_positive()) {
        return Err(RapError::TooFewPoints(1));
    }
    let points: Vec<Point> = (n..=2 * n)
        .map(|i| {
            let qi = q(i);
            p0.iter().zip(p_inf).map(|(a, b)| BigRational::new(a + b * BigInt::from(i), qi.clone())).collect()
        })
        .collect();
    let den = q(n) * q(2 * n);
    let mut v: Point = p0.iter().zip(p_inf).map(|(a, b)| BigRational::new(q0 * b - q_inf * a, den.clone())).collect();
    if is_zero(&v) {
        if n > 0 {
            return Err(RapError::DegenerateIncrement);
        }
        // a single point certifies with any increment
        v = (0..p0.len()).map(|k| if k == 0 { BigRational::one() } else { BigRational::zero() }).collect();
    }
    let two = BigRational::from_integer(2.into());
    let cert = build(&points, v, &two).expect("the family is always a 2-RAP");
    Ok(cert)
}

/// A RAP on `[0, 1]` with first point `0` and last point `1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizedRap {
    pub points: Vec<BigRational>,
    pub c: BigRational,
}

impl NormalizedRap {
    /// Maps `x_i ↦ c_{0i}/c_{0N}`, which sends `x_0` to 0 and `x_N` to 1.
    pub fn from_certificate(cert: &RapCertificate) -> Option<Self> {
        let n = cert.len();
        if n < 2 {
            return None;
        }
        let total = cert.ratio(0, n - 1).clone();
        let mut points = alloc::vec![BigRational::zero()];
        points.extend((1..n).map(|j| cert.ratio(0, j) / &total));
        Some(NormalizedRap { points, c: cert.c.clone() })
    }

    /// `N`, one less than the number of points.
    pub fn n(&self) -> usize {
        self.points.len() - 1
    }

    /// `C²/(2N)`.
    pub fn bound(&self) -> BigRational {
        &self.c * &self.c / BigRational::from_integer(BigInt::from(2 * self.n()))
    }
}

/// Hausdorff distance from the points to `[0, 1]`: half the largest gap.
pub fn hausdorff_to_unit(nrap: &NormalizedRap) -> BigRational {
    let mut pts = nrap.points.clone();
    pts.sort();
    let gap = pts.windows(2).map(|w| &w[1] - &w[0]).max().unwrap_or_else(BigRational::zero);
    gap / BigRational::from_integer(2.into())
}

/// An exact arithmetic progression `start + k·step`, `k < length`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApFound {
    pub start: Point,
    pub step: Point,
    pub length: usize,
}

impl ApFound {
    pub fn points(&self) -> Vec<Point> {
        (0..self.length)
            .map(|k| {
                let k = BigRational::from_integer(BigInt::from(k));
                self.start.iter().zip(&self.step).map(|(a, s)| a + &k * s).collect()
            })
            .collect()
    }
}

fn dedup_sorted(points: &[Point]) -> Vec<Point> {
    let set: BTreeSet<Point> = points.iter().cloned().collect();
    set.into_iter().collect()
}

/// Longest exact AP inside a finite set, capped at `max_len`. Starts are
/// tried in increasing order and, for each start, longer steps first; ties
/// keep the first found.
pub fn longest_ap(points: &[Point], max_len: usize) -> Option<ApFound> {
    let pts = dedup_sorted(points);
    let set: BTreeSet<&Point> = pts.iter().collect();
    let mut best: Option<ApFound> = pts.first().map(|p| ApFound {
        start: p.clone(),
        step: p.iter().map(|_| BigRational::zero()).collect(),
        length: 1,
    });
    for (i, a) in pts.iter().enumerate() {
        for b in pts[i + 1..].iter().rev() {
            let step = sub(b, a);
            // skip non-initial pairs: the AP extends backwards
            if set.contains(&sub(a, &step)) {
                continue;
            }
            let mut len = 2;
            let mut cur = b.clone();
            while len < max_len {
                let next: Point = cur.iter().zip(&step).map(|(x, s)| x + s).collect();
                if !set.contains(&next) {
                    break;
                }
                cur = next;
                len += 1;
            }
            if best.as_ref().is_none_or(|f| len > f.length) {
                best = Some(ApFound { start: a.clone(), step, length: len });
                if len >= max_len {
                    return best;
                }
            }
        }
    }
    best
}

/// Number of exact APs of exactly `len ≥ 2` points inside the set (each
/// counted once, in increasing order).
pub fn count_aps(points: &[Point], len: usize) -> usize {
    let pts = dedup_sorted(points);
    let set: BTreeSet<&Point> = pts.iter().collect();
    let mut count = 0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let step = sub(b, a);
            let mut cur = b.clone();
            let mut ok = true;
            for _ in 2..len {
                cur = cur.iter().zip(&step).map(|(x, s)| x + s).collect();
                if !set.contains(&cur) {
                    ok = false;
                    break;
                }
            }
            count += ok as usize;
        }
    }
    count
}

/// Result of [`longest_rap`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RapSearch {
    pub length: usize,
    pub certificate: Option<RapCertificate>,
    /// The search covered every candidate, so `length` is the maximum.
    pub exhausted: bool,
    /// Work units spent.
    pub work: u64,
}

/// Lines through at least two of the points, each as indices sorted along
/// the line together with a parameter proportional to arc length.
fn lines(pts: &[Point]) -> Vec<(Vec<usize>, Vec<BigRational>)> {
    let d = pts.first().map_or(0, Vec::len);
    if d == 1 {
        return alloc::vec![((0..pts.len()).collect(), pts.iter().map(|p| p[0].clone()).collect())];
    }
    let mut map: BTreeMap<(Point, Point), BTreeSet<usize>> = BTreeMap::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let v = sub(&pts[j], &pts[i]);
            let k = v.iter().position(|x| !x.is_zero()).expect("points are distinct");
            let dir = scale(&v, &v[k].recip());
            let base = sub(&pts[i], &scale(&dir, &pts[i][k]));
            let e = map.entry((dir, base)).or_default();
            e.insert(i);
            e.insert(j);
        }
    }
    map.into_iter()
        .map(|((dir, _), idx)| {
            let k = dir.iter().position(|x| !x.is_zero()).unwrap();
            let mut idx: Vec<usize> = idx.into_iter().collect();
            idx.sort_by(|a, b| pts[*a][k].cmp(&pts[*b][k]));
            let t = idx.iter().map(|&i| pts[i][k].clone()).collect();
            (idx, t)
        })
        .collect()
}

trait DpNum: Clone + Ord {
    fn diff(&self, other: &Self) -> Self;
    /// `b·self ≤ a·g`
    fn within(&self, g: &Self, a: &BigInt, b: &BigInt) -> bool;
}

impl DpNum for i128 {
    fn diff(&self, other: &Self) -> Self {
        self - other
    }
    fn within(&self, g: &Self, a: &BigInt, b: &BigInt) -> bool {
        match (a.to_i128(), b.to_i128()) {
            (Some(a), Some(b)) => match (self.checked_mul(b), g.checked_mul(a)) {
                (Some(x), Some(y)) => x <= y,
                _ => BigInt::from(*self) * b <= BigInt::from(*g) * a,
            },
            _ => BigInt::from(*self) * b <= BigInt::from(*g) * a,
        }
    }
}

impl DpNum for BigInt {
    fn diff(&self, other: &Self) -> Self {
        self - other
    }
    fn within(&self, g: &Self, a: &BigInt, b: &BigInt) -> bool {
        self * b <= g * a
    }
}

struct LineBest {
    chain: Vec<usize>,
    complete: bool,
    work: u64,
}

/// Longest chain `t_{k_0} < t_{k_1} < …` with every step in `[g, (a/b)·g]`
/// for some `g`, over the strictly increasing values `t`.
fn longest_chain<T: DpNum>(t: &[T], a: &BigInt, b: &BigInt, floor: usize, max_len: usize, budget: u64) -> LineBest {
    let n = t.len();
    let mut best: Vec<usize> = if n > 0 && floor == 0 { alloc::vec![0] } else { Vec::new() };
    let mut best_len = best.len().max(floor);
    let mut gaps: Vec<T> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            gaps.push(t[j].diff(&t[i]));
        }
    }
    gaps.sort();
    gaps.dedup();
    let span = if n > 1 { t[n - 1].diff(&t[0]) } else { return LineBest { chain: best, complete: true, work: 0 } };
    let mut work = gaps.len() as u64;
    let mut len = alloc::vec![0usize; n];
    let mut parent = alloc::vec![usize::MAX; n];
    for g in &gaps {
        if best_len >= max_len {
            return LineBest { chain: best, complete: false, work };
        }
        // a chain of best_len + 1 points spans at least best_len·g
        let need = BigInt::from(best_len.max(1) as u64);
        if !g.within(&span, &BigInt::one(), &need) {
            break;
        }
        if work + n as u64 > budget {
            return LineBest { chain: best, complete: false, work };
        }
        work += n as u64;
        // sliding window over i with g ≤ t_j − t_i ≤ (a/b)·g
        let mut window: VecDeque<usize> = VecDeque::new();
        let mut next_in = 0;
        for j in 0..n {
            while next_in < j && t[j].diff(&t[next_in]) >= *g {
                while window.back().is_some_and(|&k| len[k] <= len[next_in]) {
                    window.pop_back();
                }
                window.push_back(next_in);
                next_in += 1;
            }
            while window.front().is_some_and(|&k| !t[j].diff(&t[k]).within(g, a, b)) {
                window.pop_front();
            }
            match window.front() {
                Some(&k) => {
                    len[j] = len[k] + 1;
                    parent[j] = k;
                }
                None => {
                    len[j] = 1;
                    parent[j] = usize::MAX;
                }
            }
            if len[j] > best_len {
                best_len = len[j];
                let mut chain = alloc::vec![j];
                let mut k = j;
                while parent[k] != usize::MAX {
                    k = parent[k];
                    chain.push(k);
                }
                chain.reverse();
                best = chain;
            }
        }
    }
    LineBest { chain: best, complete: true, work }
}

/// Longest `C`-RAP contained in a finite set of points.
///
/// Each line through two points is searched separately. On a line the
/// minimum consecutive gap `g` of an optimal chain is a difference of two
/// points, and for fixed `g` a sliding-window dynamic program finds the
/// longest chain with steps in `[g, C²g]` in linear time. Candidate gaps are
/// tried in increasing order and pruned once they cannot beat the current
/// best. `budget` caps the total work; running out returns
/// [`RapError::BudgetExceeded`] with the best chain so far.
pub fn longest_rap(points: &[Point], c: &BigRational, max_len: usize, budget: u64) -> Result<RapSearch, RapError> {
    if *c < BigRational::one() {
        return Err(RapError::BadConstant);
    }
    if points.iter().any(|p| p.len() != points.first().map_or(0, Vec::len)) {
        return Err(RapError::DimensionMismatch);
    }
    let pts = dedup_sorted(points);
    let c2 = c * c;
    let (a, b) = (c2.numer().clone(), c2.denom().clone());
    let mut best: Vec<Point> = pts.first().map(|p| alloc::vec![p.clone()]).into_iter().flatten().collect();
    let mut complete = true;
    let mut work = 0u64;
    for (idx, t) in lines(&pts) {
        let den = common_denominator(&t);
        let ints: Vec<BigInt> = t.iter().map(|x| x.numer() * (&den / x.denom())).collect();
        let floor = best.len();
        let remaining = budget.saturating_sub(work);
        let fits = ints.iter().all(|v| v.bits() < 60) && a.bits() < 60 && b.bits() < 60;
        let line = if fits {
            let small: Vec<i128> = ints.iter().map(|v| v.to_i128().unwrap()).collect();
            longest_chain(&small, &a, &b, floor, max_len, remaining)
        } else {
            longest_chain(&ints, &a, &b, floor, max_len, remaining)
        };
        work += line.work;
        if line.chain.len() > best.len() {
            best = line.chain.iter().map(|&k| pts[idx[k]].clone()).collect();
        }
        if !line.complete {
            complete = false;
            break;
        }
    }
    let certificate = if best.len() >= 2 { rap_check(&best, c)? } else { None };
    debug_assert!(best.len() < 2 || certificate.is_some());
    let out = RapSearch { length: best.len(), certificate, exhausted: complete, work };
    if !complete && best.len() < max_len {
        return Err(RapError::BudgetExceeded(alloc::boxed::Box::new(out)));
    }
    Ok(out)
}

/// Endpoints of the `2^n` intervals of the `n`-th Cantor construction
/// stage, sorted. These are exactly the members of the Cantor set with
/// denominator dividing `3^n`.
pub fn cantor_endpoints(depth: u32) -> Vec<BigRational> {
    let den = num_traits::pow(BigInt::from(3), depth as usize);
    let mut lefts = alloc::vec![BigInt::zero()];
    let mut width = den.clone();
    for _ in 0..depth {
        width /= 3;
        lefts = lefts.into_iter().flat_map(|l| [l.clone(), l + &width * 2]).collect();
    }
    let mut out = Vec::with_capacity(2 * lefts.len());
    for l in lefts {
        out.push(BigRational::new(l.clone(), den.clone()));
        out.push(BigRational::new(l + 1, den.clone()));
    }
    out.sort();
    out
}

/// Wraps scalars as one-dimensional points.
pub fn points_1d(xs: &[BigRational]) -> Vec<Point> {
    xs.iter().map(|x| alloc::vec![x.clone()]).collect()
}

/// The uniform grid `{i/N}` as a normalized `1`-RAP.
pub fn uniform_grid(n: usize) -> NormalizedRap {
    NormalizedRap { points: (0..=n).map(|i| rat(i as i64, n as i64)).collect(), c: BigRational::one() }
}
