use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{big_pow, QuadScalar, RationalInterval};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TargetError {
    #[error("digit base must be at least 2, got {0}")]
    BadBase(u32),
    #[error("digit {digit} is not valid in base {base}")]
    DigitOutOfRange { digit: u8, base: u32 },
    #[error("digit generator has no digits")]
    EmptyDigits,
    #[error("target point needs at least one coordinate")]
    NoCoordinates,
}

/// Source of the digits after the radix point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DigitGenerator {
    /// The block repeated forever; the value is rational.
    Periodic(Vec<u8>),
    /// The Thue–Morse word `0110 1001 …` with `0 ↦ first`, `1 ↦ second`.
    ThueMorse(u8, u8),
    /// Independent uniform digits from a ChaCha8 stream.
    Seeded { seed: u64, alphabet: Vec<u8> },
}

/// A number in `[0, 1]` named by its base-`b` digits `0.d₁d₂d₃…`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitStream {
    base: u32,
    generator: DigitGenerator,
}

impl DigitStream {
    pub fn new(base: u32, generator: DigitGenerator) -> Result<Self, TargetError> {
        if !(2..=256).contains(&base) {
            return Err(TargetError::BadBase(base));
        }
        let digits: Vec<u8> = match &generator {
            DigitGenerator::Periodic(d) => d.clone(),
            DigitGenerator::ThueMorse(a, b) => alloc::vec![*a, *b],
            DigitGenerator::Seeded { alphabet, .. } => alphabet.clone(),
        };
        if digits.is_empty() {
            return Err(TargetError::EmptyDigits);
        }
        if let Some(&digit) = digits.iter().find(|&&d| d as u32 >= base) {
            return Err(TargetError::DigitOutOfRange { digit, base });
        }
        Ok(DigitStream { base, generator })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn generator(&self) -> &DigitGenerator {
        &self.generator
    }

    /// Sorted set of digits the generator can emit.
    pub fn alphabet(&self) -> Vec<u8> {
        let mut a = match &self.generator {
            DigitGenerator::Periodic(d) => d.clone(),
            DigitGenerator::ThueMorse(x, y) => alloc::vec![*x, *y],
            DigitGenerator::Seeded { alphabet, .. } => alphabet.clone(),
        };
        a.sort_unstable();
        a.dedup();
        a
    }

    /// The first `k` digits.
    pub fn digits(&self, k: usize) -> Vec<u8> {
        match &self.generator {
            DigitGenerator::Periodic(block) => (0..k).map(|i| block[i % block.len()]).collect(),
            DigitGenerator::ThueMorse(a, b) => {
                (0..k).map(|i| if (i as u64).count_ones().is_multiple_of(2) { *a } else { *b }).collect()
            }
            DigitGenerator::Seeded { seed, alphabet } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let n = alphabet.len() as u32;
                (0..k).map(|_| alphabet[(rng.next_u32() % n) as usize]).collect()
            }
        }
    }

    /// `0.d₁…d_k` in base `b`.
    pub fn truncation(&self, k: usize) -> BigRational {
        let b = BigInt::from(self.base);
        let mut num = BigInt::zero();
        for d in self.digits(k) {
            num = num * &b + BigInt::from(d);
        }
        BigRational::new(num, big_pow(self.base as u64, k as u32))
    }

    /// `[0.d₁…d_k, 0.d₁…d_k + b^-k]`, which contains the value.
    pub fn enclose(&self, k: usize) -> RationalInterval {
        let lo = self.truncation(k);
        let hi = &lo + BigRational::new(BigInt::one(), big_pow(self.base as u64, k as u32));
        RationalInterval::new(lo, hi)
    }

    /// Exact value for periodic streams.
    pub fn exact_value(&self) -> Option<BigRational> {
        match &self.generator {
            DigitGenerator::Periodic(block) => {
                let b = BigInt::from(self.base);
                let mut num = BigInt::zero();
                for &d in block {
                    num = num * &b + BigInt::from(d);
                }
                let den = big_pow(self.base as u64, block.len() as u32) - 1;
                Some(BigRational::new(num, den))
            }
            _ => None,
        }
    }

    /// The Thue–Morse word is not eventually periodic, so with two distinct
    /// digits the value is irrational.
    pub fn is_certified_irrational(&self) -> bool {
        matches!(self.generator, DigitGenerator::ThueMorse(a, b) if a != b)
    }
}

/// One coordinate of a target point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coordinate {
    Rational(BigRational),
    Quadratic(QuadScalar),
    Digits(DigitStream),
}

/// Bits of `√D` used per unit of precision index for quadratic coordinates.
const QUAD_BITS_PER_INDEX: u32 = 4;

impl Coordinate {
    /// Exact value when available (rationals, quadratics, periodic digits).
    pub fn exact(&self) -> Option<QuadScalar> {
        match self {
            Coordinate::Rational(r) => Some(QuadScalar::from_rational(r)),
            Coordinate::Quadratic(q) => Some(q.clone()),
            Coordinate::Digits(s) => s.exact_value().map(|r| QuadScalar::from_rational(&r)),
        }
    }

    pub fn is_certified_rational(&self) -> bool {
        self.exact().is_some_and(|v| v.is_rational())
    }

    pub fn is_certified_irrational(&self) -> bool {
        match self {
            Coordinate::Rational(_) => false,
            Coordinate::Quadratic(q) => !q.is_rational(),
            Coordinate::Digits(s) => s.is_certified_irrational(),
        }
    }

    /// Enclosure at precision index `k`: width at most `b^-k` for digit
    /// streams, a point for rationals.
    pub fn enclose(&self, k: u32) -> RationalInterval {
        match self {
            Coordinate::Rational(r) => RationalInterval::point(r.clone()),
            Coordinate::Quadratic(q) => q.enclose(k.saturating_mul(QUAD_BITS_PER_INDEX).max(8)),
            Coordinate::Digits(s) => match s.exact_value() {
                Some(r) => RationalInterval::point(r),
                None => s.enclose(k as usize),
            },
        }
    }

    /// `(x̂, ε)` with `|x − x̂| ≤ ε`. Exact kinds return themselves with
    /// `ε = 0`; digit streams return their `k`-digit truncation.
    pub fn approx(&self, k: u32) -> (QuadScalar, BigRational) {
        match self {
            Coordinate::Rational(r) => (QuadScalar::from_rational(r), BigRational::zero()),
            Coordinate::Quadratic(q) => (q.clone(), BigRational::zero()),
            Coordinate::Digits(s) => (
                QuadScalar::from_rational(&s.truncation(k as usize)),
                BigRational::new(BigInt::one(), big_pow(s.base as u64, k)),
            ),
        }
    }
}

/// A point of `R^d` given coordinate-wise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetPoint {
    coords: Vec<Coordinate>,
}

impl TargetPoint {
    pub fn new(coords: Vec<Coordinate>) -> Result<Self, TargetError> {
        if coords.is_empty() {
            return Err(TargetError::NoCoordinates);
        }
        Ok(TargetPoint { coords })
    }

    pub fn scalar(c: Coordinate) -> Self {
        TargetPoint { coords: alloc::vec![c] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Coordinate] {
        &self.coords
    }

    /// Every coordinate is a known rational.
    pub fn is_certified_rational(&self) -> bool {
        self.coords.iter().all(Coordinate::is_certified_rational)
    }

    /// `(x̂, ε)` with `‖x − x̂‖_max ≤ ε`.
    pub fn approx(&self, k: u32) -> (Vec<QuadScalar>, BigRational) {
        let mut eps = BigRational::zero();
        let mut xs = Vec::with_capacity(self.coords.len());
        for c in &self.coords {
            let (x, e) = c.approx(k);
            if e > eps {
                eps = e;
            }
            xs.push(x);
        }
        (xs, eps)
    }

    /// Exact coordinates, when every coordinate has one.
    pub fn exact(&self) -> Option<Vec<QuadScalar>> {
        self.coords.iter().map(Coordinate::exact).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn tern(g: DigitGenerator) -> DigitStream {
        DigitStream::new(3, g).unwrap()
    }

    #[test]
    fn periodic_truncation() {
        let s = tern(DigitGenerator::Periodic(alloc::vec![0, 2]));
        // 0.0202₃ = 20/81
        let c = Coordinate::Digits(s.clone());
        let (x, e) = c.approx(4);
        assert_eq!(x.to_rational().unwrap(), rat(20, 81));
        assert_eq!(e, rat(1, 81));
        assert_eq!(s.exact_value().unwrap(), rat(1, 4));
        assert!(c.is_certified_rational());
    }

    #[test]
    fn exact_kinds_have_zero_error() {
        let c = Coordinate::Rational(rat(1, 4));
        assert_eq!(c.approx(7), (QuadScalar::from_rational(&rat(1, 4)), BigRational::zero()));
        let phi = QuadScalar::new((-1).into(), 1.into(), 2.into(), 5).unwrap();
        let c = Coordinate::Quadratic(phi.clone());
        assert_eq!(c.approx(3), (phi, BigRational::zero()));
        assert!(c.is_certified_irrational());
    }

    #[test]
    fn thue_morse_digits() {
        let s = tern(DigitGenerator::ThueMorse(0, 2));
        assert_eq!(s.digits(8), alloc::vec![0, 2, 2, 0, 2, 0, 0, 2]);
        assert!(s.is_certified_irrational());
    }

    #[test]
    fn seeded_is_reproducible() {
        let a = tern(DigitGenerator::Seeded { seed: 9, alphabet: alloc::vec![0, 2] });
        assert_eq!(a.digits(64), a.digits(64));
        assert_eq!(&a.digits(100)[..64], &a.digits(64)[..]);
        assert!(a.digits(200).iter().all(|d| *d == 0 || *d == 2));
        let b = tern(DigitGenerator::Seeded { seed: 10, alphabet: alloc::vec![0, 2] });
        assert_ne!(a.digits(64), b.digits(64));
    }

    #[test]
    fn error_bounds_shrink_and_enclose() {
        let s = tern(DigitGenerator::Seeded { seed: 1, alphabet: alloc::vec![0, 2] });
        let c = Coordinate::Digits(s);
        let mut prev = None;
        for k in 1..40 {
            let (_, e) = c.approx(k);
            if let Some(p) = prev {
                assert!(e <= p);
            }
            let fine = c.enclose(k + 20);
            assert!(c.enclose(k).refine(&fine).unwrap() == fine);
            prev = Some(e);
        }
    }

    #[test]
    fn rejects_invalid_streams() {
        assert_eq!(DigitStream::new(1, DigitGenerator::Periodic(alloc::vec![0])), Err(TargetError::BadBase(1)));
        assert_eq!(
            DigitStream::new(3, DigitGenerator::Periodic(alloc::vec![0, 3])),
            Err(TargetError::DigitOutOfRange { digit: 3, base: 3 })
        );
        assert_eq!(DigitStream::new(3, DigitGenerator::Periodic(alloc::vec![])), Err(TargetError::EmptyDigits));
    }
}
