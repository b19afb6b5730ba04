use core::cmp::Ordering;

use num_rational::BigRational;

use super::{Coordinate, RationalInterval};

/// Default refinement cap (digits of a digit-stream target).
pub const DEFAULT_MAX_PRECISION: u32 = 4096;

const START_PRECISION: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("precision cap {cap} reached without a decision")]
pub struct PrecisionExhausted {
    pub cap: u32,
}

/// Enclosure of `|scale·x − shift|` at precision index `k`.
pub fn enclose_abs_affine(x: &Coordinate, scale: &BigRational, shift: &BigRational, k: u32) -> RationalInterval {
    match x.exact() {
        Some(v) if v.is_rational() => {
            let r = v.to_rational().unwrap() * scale - shift;
            RationalInterval::point(if r < BigRational::from_integer(0.into()) { -r } else { r })
        }
        _ => x.enclose(k).scale(scale).shift(&-shift).abs(),
    }
}

/// Compares `|scale·x − shift|^power` with `bound`.
///
/// Exact coordinates are compared exactly (so `Equal` is possible); digit
/// streams are refined until the enclosure falls strictly on one side of
/// `bound`, up to precision index `cap`.
pub fn cmp_abs_affine_pow(
    x: &Coordinate,
    scale: &BigRational,
    shift: &BigRational,
    power: u32,
    bound: &BigRational,
    cap: u32,
) -> Result<Ordering, PrecisionExhausted> {
    if let Some(v) = x.exact() {
        let y = v.mul_rational(scale).add_rational(&-shift).abs().pow(power);
        return Ok(y.add_rational(&-bound).signum().cmp(&0));
    }
    let mut k = START_PRECISION.min(cap);
    loop {
        let iv = enclose_abs_affine(x, scale, shift, k).pow(power);
        if iv.hi() < bound {
            return Ok(Ordering::Less);
        }
        if iv.lo() > bound {
            return Ok(Ordering::Greater);
        }
        if k >= cap {
            return Err(PrecisionExhausted { cap });
        }
        k = k.saturating_mul(2).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int, DigitGenerator, DigitStream, QuadScalar};

    #[test]
    fn exact_and_stream_agree() {
        let phi = Coordinate::Quadratic(QuadScalar::new((-1).into(), 1.into(), 2.into(), 5).unwrap());
        // |8φ − 5| ≈ 0.0557 ≤ 1/8
        assert_eq!(cmp_abs_affine_pow(&phi, &rat_int(8), &rat_int(5), 1, &rat(1, 8), 64), Ok(Ordering::Less));
        assert_eq!(cmp_abs_affine_pow(&phi, &rat_int(8), &rat_int(5), 1, &rat(1, 20), 64), Ok(Ordering::Greater));
        let tm = Coordinate::Digits(DigitStream::new(3, DigitGenerator::ThueMorse(0, 2)).unwrap());
        let x = tm.enclose(60).midpoint();
        let r = cmp_abs_affine_pow(&tm, &rat_int(1), &x, 1, &rat(1, 1000), 64);
        assert_eq!(r, Ok(Ordering::Less));
    }

    #[test]
    fn equality_is_reported_for_exact() {
        let half = Coordinate::Rational(rat(1, 2));
        assert_eq!(cmp_abs_affine_pow(&half, &rat_int(1), &rat_int(0), 2, &rat(1, 4), 8), Ok(Ordering::Equal));
    }

    #[test]
    fn cap_is_reported() {
        let tm = Coordinate::Digits(DigitStream::new(3, DigitGenerator::ThueMorse(0, 2)).unwrap());
        let x = tm.enclose(200).midpoint();
        assert_eq!(cmp_abs_affine_pow(&tm, &rat_int(1), &x, 1, &rat(1, 1_000_000), 8), Err(PrecisionExhausted { cap: 8 }));
    }
}
