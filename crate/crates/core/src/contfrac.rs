//! Continued fractions `x = [0; a₁, a₂, …]` with certified partial quotients,
//! convergents `p_k/q_k` and the semiconvergents
//! `p_{n,b}/q_{n,b} = (p_{n−2} + b·p_{n−1})/(q_{n−2} + b·q_{n−1})`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::exact::{cmp_abs_affine_pow, Coordinate, PrecisionExhausted, QuadScalar};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CfError {
    #[error("target is not in the open unit interval")]
    OutOfRange,
    #[error("rational target has only {available} partial quotients")]
    Terminated { available: usize },
    #[error("partial quotient a_{index} not certified at precision cap {cap}")]
    PrecisionExhausted { index: usize, cap: u32 },
}

/// Partial quotients `a₁ … a_n` of a target in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfExpansion {
    partials: Vec<BigInt>,
    /// Precision index at which each term was certified (0 for exact targets).
    depths: Vec<u32>,
}

impl CfExpansion {
    /// An expansion given directly by its partial quotients (all ≥ 1).
    pub fn from_partials(partials: Vec<BigInt>) -> Self {
        assert!(partials.iter().all(|a| a.is_positive()), "partial quotients must be positive");
        let depths = alloc::vec![0; partials.len()];
        CfExpansion { partials, depths }
    }

    pub fn partials(&self) -> &[BigInt] {
        &self.partials
    }

    pub fn certification_depths(&self) -> &[u32] {
        &self.depths
    }

    pub fn len(&self) -> usize {
        self.partials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty()
    }

    pub fn convergents(&self) -> Vec<(BigInt, BigInt)> {
        convergents(&self.partials)
    }
}

/// Canonical expansion of a rational in `(0, 1]` (last term ≥ 2 unless the value is 1).
pub fn rational_partials(r: &BigRational) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut num, mut den) = (r.numer().clone(), r.denom().clone());
    // x = num/den; 1/x = den/num
    while !num.is_zero() {
        let (a, rem) = den.div_rem(&num);
        out.push(a);
        den = num;
        num = rem;
    }
    out
}

fn quad_partials(x: &QuadScalar, n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n);
    let mut y = x.clone();
    while out.len() < n && !y.is_zero() {
        let inv = y.recip().expect("nonzero");
        let a = inv.floor();
        y = inv.add_rational(&BigRational::from_integer(-a.clone()));
        out.push(a);
    }
    out
}

fn common_prefix(a: &[BigInt], b: &[BigInt]) -> usize {
    let m = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    // the cylinder of [a₁ … a_m] is an open interval only when both sides continue
    m.min(a.len().saturating_sub(1)).min(b.len().saturating_sub(1))
}

/// First `n` partial quotients of `x ∈ (0, 1)`.
///
/// Exact targets use the Euclidean algorithm (rationals) or exact quadratic
/// arithmetic. Digit streams are bracketed at precision `k = 16, 32, …, cap`
/// and a term is accepted once both ends of the bracket share it with more
/// terms to follow, which places the whole bracket in one cylinder.
pub fn expand(x: &Coordinate, n: usize, cap: u32) -> Result<CfExpansion, CfError> {
    if let Some(v) = x.exact() {
        if v.signum() <= 0 || v >= QuadScalar::from_int(1) {
            return Err(CfError::OutOfRange);
        }
        let partials = match v.to_rational() {
            Some(r) => rational_partials(&r),
            None => quad_partials(&v, n),
        };
        if partials.len() < n {
            return Err(CfError::Terminated { available: partials.len() });
        }
        let partials: Vec<BigInt> = partials.into_iter().take(n).collect();
        return Ok(CfExpansion::from_partials(partials));
    }
    let mut partials: Vec<BigInt> = Vec::new();
    let mut depths = Vec::new();
    let mut k = 16u32.min(cap);
    loop {
        let iv = x.enclose(k);
        if iv.lo().is_positive() && *iv.hi() <= BigRational::one() {
            let lo = rational_partials(iv.lo());
            let hi = rational_partials(iv.hi());
            let m = common_prefix(&lo, &hi);
            debug_assert!(partials.iter().zip(&lo).all(|(a, b)| a == b));
            while partials.len() < m.min(n) {
                partials.push(lo[partials.len()].clone());
                depths.push(k);
            }
        } else if iv.hi().is_negative() || *iv.lo() >= BigRational::one() {
            return Err(CfError::OutOfRange);
        }
        if partials.len() >= n {
            return Ok(CfExpansion { partials, depths });
        }
        if k >= cap {
            return Err(CfError::PrecisionExhausted { index: partials.len() + 1, cap });
        }
        k = k.saturating_mul(2).min(cap);
    }
}

/// Convergents `(p_k, q_k)`, `k = 1 … len`, from seeds `1/0` and `0/1`.
pub fn convergents(partials: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p2, mut q2) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    let mut out = Vec::with_capacity(partials.len());
    for a in partials {
        let p = a * &p1 + &p2;
        let q = a * &q1 + &q2;
        p2 = core::mem::replace(&mut p1, p.clone());
        q2 = core::mem::replace(&mut q1, q.clone());
        out.push((p, q));
    }
    out
}

/// `p_{n,b}/q_{n,b} = [0; a₁, …, a_{n−1}, b]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Semiconvergent {
    pub n: usize,
    pub b: BigInt,
    pub p: BigInt,
    pub q: BigInt,
}

/// Needs `a₁ … a_{n−1}`; returns `None` if `n == 0`, `b < 1` or the
/// expansion is too short.
pub fn semiconvergent(partials: &[BigInt], n: usize, b: &BigInt) -> Option<Semiconvergent> {
    if n == 0 || !b.is_positive() || partials.len() + 1 < n {
        return None;
    }
    let conv = convergents(&partials[..n - 1]);
    let seed = |k: isize| -> (BigInt, BigInt) {
        match k {
            -1 => (BigInt::one(), BigInt::zero()),
            0 => (BigInt::zero(), BigInt::one()),
            k => conv[(k - 1) as usize].clone(),
        }
    };
    let (p2, q2) = seed(n as isize - 2);
    let (p1, q1) = seed(n as isize - 1);
    Some(Semiconvergent { n, b: b.clone(), p: p2 + b * p1, q: q2 + b * q1 })
}

/// Where `p/q` sits in the chain `|x − p/q| < 1/(2q²) ⇒ convergent ⇒ |x − p/q| < 1/q²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvergentClass {
    /// `|x − p/q| < 1/(2q²)`: necessarily a convergent.
    MustBeConvergent,
    /// `1/(2q²) < |x − p/q| < 1/q²`: as close as a convergent.
    IsConvergentQuality,
    /// `|x − p/q| > 1/q²`: not a convergent.
    Neither,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FilterError {
    #[error("denominator must be positive")]
    BadDenominator,
    #[error("|x − p/q| equals the threshold 1/({factor}q²) exactly")]
    ThresholdEquality { factor: u32 },
    #[error("undecidable: {0}")]
    Undecidable(#[from] PrecisionExhausted),
}

pub fn convergent_filter(x: &Coordinate, p: &BigInt, q: &BigInt, cap: u32) -> Result<ConvergentClass, FilterError> {
    if !q.is_positive() {
        return Err(FilterError::BadDenominator);
    }
    let qr = BigRational::from_integer(q.clone());
    let pr = BigRational::from_integer(p.clone());
    // |x − p/q| < 1/(f q²)  ⇔  |q x − p| < 1/(f q)
    for (factor, class) in [(2u32, ConvergentClass::MustBeConvergent), (1, ConvergentClass::IsConvergentQuality)] {
        let bound = BigRational::new(BigInt::one(), q * BigInt::from(factor));
        match cmp_abs_affine_pow(x, &qr, &pr, 1, &bound, cap)? {
            Ordering::Less => return Ok(class),
            Ordering::Equal => return Err(FilterError::ThresholdEquality { factor }),
            Ordering::Greater => {}
        }
    }
    Ok(ConvergentClass::Neither)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, DigitGenerator, DigitStream, DEFAULT_MAX_PRECISION};
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&a| BigInt::from(a)).collect()
    }

    fn quad(a: i64, b: i64, c: i64, d: u64) -> Coordinate {
        Coordinate::Quadratic(QuadScalar::new(a.into(), b.into(), c.into(), d).unwrap())
    }

    #[test]
    fn quadratic_expansions() {
        let phi = quad(-1, 1, 2, 5);
        assert_eq!(expand(&phi, 6, 64).unwrap().partials(), &ints(&[1, 1, 1, 1, 1, 1])[..]);
        let s2 = quad(-1, 1, 1, 2);
        assert_eq!(expand(&s2, 4, 64).unwrap().partials(), &ints(&[2, 2, 2, 2])[..]);
        // √3 − 1 = [0; 1, 2, 1, 2, …]
        let s3 = quad(-1, 1, 1, 3);
        assert_eq!(expand(&s3, 5, 64).unwrap().partials(), &ints(&[1, 2, 1, 2, 1])[..]);
    }

    #[test]
    fn rational_expansion() {
        let x = Coordinate::Rational(rat(2, 5));
        assert_eq!(expand(&x, 2, 64).unwrap().partials(), &ints(&[2, 2])[..]);
        assert_eq!(expand(&x, 3, 64), Err(CfError::Terminated { available: 2 }));
        assert_eq!(expand(&Coordinate::Rational(rat(3, 2)), 1, 64), Err(CfError::OutOfRange));
        // periodic digits are rational: 0.(02)₃ = 1/4 = [0; 4]
        let s = Coordinate::Digits(DigitStream::new(3, DigitGenerator::Periodic(alloc::vec![0, 2])).unwrap());
        assert_eq!(expand(&s, 1, 64).unwrap().partials(), &ints(&[4])[..]);
    }

    #[test]
    fn convergent_recurrence() {
        let c = convergents(&ints(&[1, 1, 1, 1, 1]));
        let want: Vec<(BigInt, BigInt)> =
            [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)].iter().map(|&(p, q)| (BigInt::from(p), BigInt::from(q))).collect();
        assert_eq!(c, want);
        let c = convergents(&ints(&[2, 2, 2]));
        let want: Vec<(BigInt, BigInt)> =
            [(1, 2), (2, 5), (5, 12)].iter().map(|&(p, q)| (BigInt::from(p), BigInt::from(q))).collect();
        assert_eq!(c, want);
        assert!(convergents(&[]).is_empty());
    }

    #[test]
    fn semiconvergent_examples() {
        let s = semiconvergent(&ints(&[1, 2]), 2, &BigInt::from(2)).unwrap();
        assert_eq!((s.p, s.q), (BigInt::from(2), BigInt::from(3)));
        let s = semiconvergent(&ints(&[1, 1, 1]), 2, &BigInt::from(1)).unwrap();
        assert_eq!((s.p, s.q), (BigInt::from(1), BigInt::from(2)));
        let s = semiconvergent(&[], 1, &BigInt::from(7)).unwrap();
        assert_eq!((s.p, s.q), (BigInt::from(1), BigInt::from(7)));
        assert!(semiconvergent(&ints(&[1]), 0, &BigInt::from(1)).is_none());
        assert!(semiconvergent(&ints(&[1]), 2, &BigInt::from(0)).is_none());
        assert!(semiconvergent(&ints(&[1]), 4, &BigInt::from(1)).is_none());
    }

    // direct evaluation of [0; a₁, …, a_k] as a finite fraction
    fn eval_cf(partials: &[BigInt]) -> BigRational {
        let mut acc = BigRational::zero();
        for a in partials.iter().rev() {
            acc = (BigRational::from_integer(a.clone()) + acc).recip();
        }
        acc
    }

    #[test]
    fn semiconvergents_track_the_increment() {
        // |x − p_{n,b}/q_{n,b}| stays within a small multiple of (|a_n − b| + 1)/q_n²
        let x = quad(-1, 1, 1, 2);
        let cf = expand(&x, 12, 64).unwrap();
        let conv = cf.convergents();
        for n in 2..12 {
            let an = &cf.partials()[n - 1];
            let qn = &conv[n - 1].1;
            for k in 0..6i64 {
                let b = an + k;
                let s = semiconvergent(cf.partials(), n, &b).unwrap();
                let bound = BigRational::new(BigInt::from(4 * (k + 1)), qn * qn);
                let ord = cmp_abs_affine_pow(&x, &BigRational::from_integer(1.into()), &BigRational::new(s.p, s.q), 1, &bound, 64);
                assert_eq!(ord, Ok(Ordering::Less), "n={n} b={b}");
            }
        }
    }

    #[test]
    fn filter_examples() {
        let s2 = quad(-1, 1, 1, 2);
        assert_eq!(convergent_filter(&s2, &2.into(), &5.into(), 64), Ok(ConvergentClass::MustBeConvergent));
        // |x − 1/3| ≈ 0.0809 lies between 1/18 and 1/9
        assert_eq!(convergent_filter(&s2, &1.into(), &3.into(), 64), Ok(ConvergentClass::IsConvergentQuality));
        // |x − 1/4| ≈ 0.164 > 1/16
        assert_eq!(convergent_filter(&s2, &1.into(), &4.into(), 64), Ok(ConvergentClass::Neither));
        let half = Coordinate::Rational(rat(1, 2));
        assert_eq!(convergent_filter(&half, &1.into(), &2.into(), 64), Ok(ConvergentClass::MustBeConvergent));
        // |1/2 − 0/1| = 1/2 = 1/(2·1²)
        assert_eq!(convergent_filter(&half, &0.into(), &1.into(), 64), Err(FilterError::ThresholdEquality { factor: 2 }));
        assert_eq!(convergent_filter(&half, &0.into(), &0.into(), 64), Err(FilterError::BadDenominator));
        // 3/7 ≈ 0.428 vs √2 − 1: 0.0144 ∈ (1/98, 1/49)
        assert_eq!(convergent_filter(&s2, &3.into(), &7.into(), 64), Ok(ConvergentClass::IsConvergentQuality));
    }

    #[test]
    fn digit_stream_depths_are_recorded() {
        let tm = Coordinate::Digits(DigitStream::new(3, DigitGenerator::ThueMorse(0, 2)).unwrap());
        let cf = expand(&tm, 20, DEFAULT_MAX_PRECISION).unwrap();
        assert_eq!(cf.len(), 20);
        assert!(cf.certification_depths().windows(2).all(|w| w[0] <= w[1]));
        assert!(matches!(expand(&tm, 20, 8), Err(CfError::PrecisionExhausted { cap: 8, .. })));
    }

    proptest! {
        #[test]
        fn determinant_is_unimodular(v in prop::collection::vec(1i64..50, 1..30)) {
            let c = convergents(&ints(&v));
            let mut prev = (BigInt::zero(), BigInt::one());
            for (p, q) in &c {
                let det = p * &prev.1 - &prev.0 * q;
                prop_assert_eq!(det.abs(), BigInt::one());
                prev = (p.clone(), q.clone());
            }
            // last convergent evaluates the finite fraction
            let (p, q) = c.last().unwrap();
            prop_assert_eq!(BigRational::new(p.clone(), q.clone()), eval_cf(&ints(&v)));
        }

        #[test]
        fn semiconvergent_at_an_is_the_convergent(v in prop::collection::vec(1i64..50, 1..20)) {
            let p = ints(&v);
            let conv = convergents(&p);
            for n in 1..=p.len() {
                let s = semiconvergent(&p, n, &p[n - 1]).unwrap();
                prop_assert_eq!((s.p, s.q), conv[n - 1].clone());
            }
        }

        #[test]
        fn certified_terms_survive_doubling(seed in 0u64..1000) {
            let s = Coordinate::Digits(DigitStream::new(3, DigitGenerator::Seeded { seed, alphabet: alloc::vec![0, 2] }).unwrap());
            let a = expand(&s, 8, 512).unwrap();
            // at double precision the same terms come out
            let iv = s.enclose(2 * a.certification_depths().last().copied().unwrap().max(16));
            let lo = rational_partials(iv.lo());
            prop_assert_eq!(&lo[..8], a.partials());
        }
    }
}
