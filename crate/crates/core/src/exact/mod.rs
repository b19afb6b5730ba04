//! Exact scalars, intervals and refinable target points.

mod certify;
mod interval;
mod quad;
mod target;

pub use certify::{cmp_abs_affine_pow, enclose_abs_affine, PrecisionExhausted, DEFAULT_MAX_PRECISION};
pub use interval::RationalInterval;
pub use quad::{squarefree_decompose, QuadError, QuadScalar};
pub use target::{Coordinate, DigitGenerator, DigitStream, TargetError, TargetPoint};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

/// Integer `n` as a big rational.
pub fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `n/d` as a big rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `base^exp` as a big integer.
pub fn big_pow(base: u64, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// Largest integer `r` with `r^n <= x`, for `x >= 0`.
pub fn floor_root(x: &BigInt, n: u32) -> BigInt {
    debug_assert!(!x.is_negative());
    x.nth_root(n)
}

/// Floor of a rational.
pub fn rat_floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Ceiling of a rational.
pub fn rat_ceil(x: &BigRational) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Nearest integer to `x`, ties resolved toward the even neighbour.
pub fn round_half_even(x: &BigRational) -> BigInt {
    let fl = rat_floor(x);
    let frac = x - BigRational::from_integer(fl.clone());
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    match frac.cmp(&half) {
        core::cmp::Ordering::Less => fl,
        core::cmp::Ordering::Greater => fl + 1,
        core::cmp::Ordering::Equal => {
            if fl.is_even() {
                fl
            } else {
                fl + 1
            }
        }
    }
}

/// Least common multiple of the denominators of `xs` (1 for an empty slice).
pub fn common_denominator(xs: &[BigRational]) -> BigInt {
    xs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// `true` if `n > 0` is a perfect `k`-th power.
pub fn is_perfect_power(n: &BigUint, k: u32) -> bool {
    let r = n.nth_root(k);
    num_traits::pow(r, k as usize) == *n
}
