use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{rat_ceil, rat_floor};

/// A closed interval `[lo, hi]` of rationals.
///
/// Every operation returns an interval containing all results of applying
/// the operation to members of the operands.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RationalInterval {
    /// Panics if `lo > hi`.
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        RationalInterval { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        RationalInterval { lo: x.clone(), hi: x }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Intersection with a second enclosure of the same quantity.
    /// Returns `None` when the enclosures are inconsistent.
    pub fn refine(&self, other: &Self) -> Option<Self> {
        let lo = if self.lo > other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi < other.hi { &self.hi } else { &other.hi };
        (lo <= hi).then(|| RationalInterval { lo: lo.clone(), hi: hi.clone() })
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self
        } else {
            let m = if -&self.lo > self.hi { -&self.lo } else { self.hi.clone() };
            RationalInterval { lo: BigRational::zero(), hi: m }
        }
    }

    /// Interval hull of `max(x, y)` over members.
    pub fn max(&self, other: &Self) -> Self {
        RationalInterval {
            lo: if self.lo > other.lo { self.lo.clone() } else { other.lo.clone() },
            hi: if self.hi > other.hi { self.hi.clone() } else { other.hi.clone() },
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let a = &self.lo * r;
        let b = &self.hi * r;
        if a <= b {
            RationalInterval { lo: a, hi: b }
        } else {
            RationalInterval { lo: b, hi: a }
        }
    }

    pub fn shift(&self, r: &BigRational) -> Self {
        RationalInterval { lo: &self.lo + r, hi: &self.hi + r }
    }

    /// `None` when the divisor contains zero.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.contains_zero() {
            return None;
        }
        let inv = RationalInterval { lo: other.hi.recip(), hi: other.lo.recip() };
        Some(self * &inv)
    }

    pub fn pow(&self, n: u32) -> Self {
        if n == 0 {
            return RationalInterval::point(BigRational::one());
        }
        if n % 2 == 1 {
            return RationalInterval { lo: num_traits::pow(self.lo.clone(), n as usize), hi: num_traits::pow(self.hi.clone(), n as usize) };
        }
        let a = self.abs();
        RationalInterval { lo: num_traits::pow(a.lo, n as usize), hi: num_traits::pow(a.hi, n as usize) }
    }

    /// Widens the endpoints outward to multiples of `2^-bits`, which bounds
    /// denominator growth in long computations.
    pub fn round_outward(&self, bits: u32) -> Self {
        let scale = BigRational::from_integer(BigInt::one() << bits);
        let lo = BigRational::new(rat_floor(&(&self.lo * &scale)), scale.to_integer());
        let hi = BigRational::new(rat_ceil(&(&self.hi * &scale)), scale.to_integer());
        RationalInterval { lo, hi }
    }
}

impl Neg for &RationalInterval {
    type Output = RationalInterval;
    fn neg(self) -> RationalInterval {
        RationalInterval { lo: -&self.hi, hi: -&self.lo }
    }
}

impl Add for &RationalInterval {
    type Output = RationalInterval;
    fn add(self, rhs: &RationalInterval) -> RationalInterval {
        RationalInterval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl Sub for &RationalInterval {
    type Output = RationalInterval;
    fn sub(self, rhs: &RationalInterval) -> RationalInterval {
        RationalInterval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }
}

impl Mul for &RationalInterval {
    type Output = RationalInterval;
    fn mul(self, rhs: &RationalInterval) -> RationalInterval {
        let cands = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if *c < lo {
                lo = c.clone();
            }
            if *c > hi {
                hi = c.clone();
            }
        }
        RationalInterval { lo, hi }
    }
}

impl fmt::Display for RationalInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn iv(a: (i64, i64), b: (i64, i64)) -> RationalInterval {
        let (x, y) = (rat(a.0, a.1), rat(b.0, b.1));
        if x <= y {
            RationalInterval::new(x, y)
        } else {
            RationalInterval::new(y, x)
        }
    }

    fn member(i: &RationalInterval, t: (u32, u32)) -> BigRational {
        // point lo + (hi − lo)·t.0/t.1
        i.lo() + i.width() * rat(t.0 as i64, t.1 as i64)
    }

    fn frac() -> impl Strategy<Value = (i64, i64)> {
        (-50i64..50, 1i64..20)
    }

    fn weight() -> impl Strategy<Value = (u32, u32)> {
        (1u32..20).prop_flat_map(|d| (0..=d, Just(d)))
    }

    proptest! {
        #[test]
        fn arithmetic_is_sound(a in frac(), b in frac(), c in frac(), d in frac(), s in weight(), t in weight()) {
            let x = iv(a, b);
            let y = iv(c, d);
            let u = member(&x, s);
            let v = member(&y, t);
            prop_assert!((&x + &y).contains(&(&u + &v)));
            prop_assert!((&x - &y).contains(&(&u - &v)));
            prop_assert!((&x * &y).contains(&(&u * &v)));
            prop_assert!(x.abs().contains(&u.abs()));
            prop_assert!(x.pow(3).contains(&(&u * &u * &u)));
            prop_assert!(x.pow(2).contains(&(&u * &u)));
            if let Some(q) = x.checked_div(&y) {
                prop_assert!(q.contains(&(&u / &v)));
            }
            prop_assert!(x.round_outward(8).contains(&u));
        }
    }

    #[test]
    fn division_by_zero_interval() {
        assert!(iv((1, 1), (2, 1)).checked_div(&iv((-1, 1), (1, 1))).is_none());
    }

    #[test]
    fn refine_never_widens() {
        let a = iv((0, 1), (1, 1));
        let b = iv((1, 2), (2, 1));
        let r = a.refine(&b).unwrap();
        assert_eq!(r, iv((1, 2), (1, 1)));
        assert!(a.refine(&iv((3, 1), (4, 1))).is_none());
    }
}
