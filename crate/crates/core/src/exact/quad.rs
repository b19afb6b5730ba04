use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::RationalInterval;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QuadError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("radicand {0} is not a squarefree integer greater than 1")]
    BadRadicand(u64),
    #[error("cannot combine sqrt({0}) with sqrt({1})")]
    MixedRadicals(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
}

/// A real number `(a + b·√D)/c` with `D` squarefree, `c > 0` and
/// `gcd(a, b, c) = 1`.
///
/// Rationals are the case `b = 0`; they carry no radicand, so they combine
/// with every field. Two irrational values with different radicands cannot
/// be added or multiplied (the result would need two radicals), but they can
/// always be compared.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadScalar {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    // 0 exactly when b == 0
    d: u64,
}

fn is_squarefree(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

/// Writes `n = s²·D` with `D` squarefree (`D = 1` when `n` is a square).
pub fn squarefree_decompose(n: &BigUint) -> (BigUint, BigUint) {
    if n.is_zero() {
        return (BigUint::zero(), BigUint::one());
    }
    let mut rest = n.clone();
    let mut square = BigUint::one();
    let mut free = BigUint::one();
    let mut p = BigUint::from(2u32);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            square *= &p;
        }
        if e % 2 == 1 {
            free *= &p;
        }
        p += if p == BigUint::from(2u32) { 1u32 } else { 2u32 };
    }
    // what remains is 1 or a prime
    if rest.sqrt().pow(2) == rest {
        square *= rest.sqrt();
    } else {
        free *= rest;
    }
    (square, free)
}

fn sign_of(a: &BigInt, b: &BigInt, d: u64) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    let to_ord = |s: Sign| match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    };
    if sb == Sign::NoSign {
        return to_ord(sa);
    }
    if sa == Sign::NoSign || sa == sb {
        return to_ord(sb);
    }
    // opposite signs: compare a² with b²·D
    let a2 = a * a;
    let bd = b * b * BigInt::from(d);
    match a2.cmp(&bd) {
        Ordering::Greater => to_ord(sa),
        Ordering::Less => to_ord(sb),
        Ordering::Equal => Ordering::Equal,
    }
}

impl QuadScalar {
    /// `(a + b·√D)/c`, normalized.
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: u64) -> Result<Self, QuadError> {
        if c.is_zero() {
            return Err(QuadError::ZeroDenominator);
        }
        if !is_squarefree(d) {
            return Err(QuadError::BadRadicand(d));
        }
        Ok(Self::normalized(a, b, c, d))
    }

    fn normalized(mut a: BigInt, mut b: BigInt, mut c: BigInt, mut d: u64) -> Self {
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        if b.is_zero() {
            d = 0;
        }
        QuadScalar { a, b, c, d }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        QuadScalar { a: r.numer().clone(), b: BigInt::zero(), c: r.denom().clone(), d: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    /// `√D`.
    pub fn sqrt(d: u64) -> Result<Self, QuadError> {
        Self::new(BigInt::zero(), BigInt::one(), BigInt::one(), d)
    }

    pub fn rational_part(&self) -> &BigInt {
        &self.a
    }

    pub fn surd_coeff(&self) -> &BigInt {
        &self.b
    }

    pub fn denominator(&self) -> &BigInt {
        &self.c
    }

    /// The radicand `D`, or `None` for rational values.
    pub fn radicand(&self) -> Option<u64> {
        if self.d == 0 {
            None
        } else {
            Some(self.d)
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    /// Exact sign: `-1`, `0` or `+1`.
    pub fn signum(&self) -> i8 {
        match sign_of(&self.a, &self.b, self.d) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        }
    }

    fn common_radicand(&self, other: &Self) -> Result<u64, QuadError> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (d, e) if d == e => Ok(d),
            (d, e) => Err(QuadError::MixedRadicals(d, e)),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, QuadError> {
        let d = self.common_radicand(other)?;
        Ok(Self::normalized(
            &self.a * &other.c + &other.a * &self.c,
            &self.b * &other.c + &other.b * &self.c,
            &self.c * &other.c,
            d,
        ))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, QuadError> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, QuadError> {
        let d = self.common_radicand(other)?;
        let dd = BigInt::from(d);
        Ok(Self::normalized(
            &self.a * &other.a + &self.b * &other.b * dd,
            &self.a * &other.b + &other.a * &self.b,
            &self.c * &other.c,
            d,
        ))
    }

    pub fn recip(&self) -> Result<Self, QuadError> {
        if self.is_zero() {
            return Err(QuadError::DivisionByZero);
        }
        // c/(a + b√D) = c(a − b√D)/(a² − b²D)
        let norm = &self.a * &self.a - &self.b * &self.b * BigInt::from(self.d);
        Ok(Self::normalized(&self.c * &self.a, -(&self.c * &self.b), norm, self.d))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self, QuadError> {
        self.try_mul(&other.recip()?)
    }

    pub fn mul_rational(&self, r: &BigRational) -> Self {
        Self::normalized(&self.a * r.numer(), &self.b * r.numer(), &self.c * r.denom(), self.d)
    }

    pub fn add_rational(&self, r: &BigRational) -> Self {
        Self::normalized(&self.a * r.denom() + r.numer() * &self.c, &self.b * r.denom(), &self.c * r.denom(), self.d)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::from_int(1);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.a.div_floor(&self.c);
        }
        // b√D lies strictly between two consecutive integers
        let s = (&self.b * &self.b * BigInt::from(self.d)).sqrt();
        let approx = if self.b.is_negative() { &self.a - &s - 1 } else { &self.a + &s };
        let mut k = approx.div_floor(&self.c);
        loop {
            let k1 = BigRational::from_integer(&k + 1);
            if (self - &Self::from_rational(&k1)).signum() >= 0 {
                k += 1;
                continue;
            }
            let k0 = BigRational::from_integer(k.clone());
            if (self - &Self::from_rational(&k0)).signum() < 0 {
                k -= 1;
                continue;
            }
            return k;
        }
    }

    /// Closed interval containing the value, of width at most `|b|/c · 2^-bits`.
    pub fn enclose(&self, bits: u32) -> RationalInterval {
        if let Some(r) = self.to_rational() {
            return RationalInterval::point(r);
        }
        let scale = BigInt::one() << bits;
        let s = (BigInt::from(self.d) * &scale * &scale).sqrt();
        let lo_root = BigRational::new(s.clone(), scale.clone());
        let hi_root = BigRational::new(s + 1, scale);
        let a = BigRational::from_integer(self.a.clone());
        let b = BigRational::from_integer(self.b.clone());
        let c = BigRational::from_integer(self.c.clone());
        let (x, y) = if self.b.is_negative() {
            ((&a + &b * &hi_root) / &c, (&a + &b * &lo_root) / &c)
        } else {
            ((&a + &b * &lo_root) / &c, (&a + &b * &hi_root) / &c)
        };
        RationalInterval::new(x, y)
    }

    /// Floating-point approximation, for display only.
    pub fn to_f64(&self) -> f64 {
        let iv = self.enclose(64);
        iv.midpoint().to_f64().unwrap_or(f64::NAN)
    }
}

impl Ord for QuadScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.try_sub(other) {
            Ok(diff) => diff.signum().cmp(&0),
            Err(_) => {
                // distinct radicals: the values differ, so refinement separates them
                let mut bits = 32;
                loop {
                    let x = self.enclose(bits);
                    let y = other.enclose(bits);
                    if x.hi() < y.lo() {
                        return Ordering::Less;
                    }
                    if y.hi() < x.lo() {
                        return Ordering::Greater;
                    }
                    bits *= 2;
                }
            }
        }
    }
}

impl PartialOrd for QuadScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Neg for &QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        QuadScalar { a: -&self.a, b: -&self.b, c: self.c.clone(), d: self.d }
    }
}

impl Neg for QuadScalar {
    type Output = QuadScalar;
    fn neg(self) -> QuadScalar {
        -&self
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $try:ident) => {
        /// Panics when both operands are irrational with different radicands.
        impl $tr<&QuadScalar> for &QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: &QuadScalar) -> QuadScalar {
                match self.$try(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{}", e),
                }
            }
        }
        impl $tr<QuadScalar> for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: QuadScalar) -> QuadScalar {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&QuadScalar> for QuadScalar {
            type Output = QuadScalar;
            fn $method(self, rhs: &QuadScalar) -> QuadScalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);
forward_binop!(Div, div, try_div);

impl From<BigRational> for QuadScalar {
    fn from(r: BigRational) -> Self {
        Self::from_rational(&r)
    }
}

impl From<i64> for QuadScalar {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl fmt::Display for QuadScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            if self.c.is_one() {
                write!(f, "{}", self.a)
            } else {
                write!(f, "{}/{}", self.a, self.c)
            }
        } else {
            write!(f, "({}{}{}*sqrt({}))/{}", self.a, if self.b.is_negative() { "" } else { "+" }, self.b, self.d, self.c)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64, b: i64, c: i64, d: u64) -> QuadScalar {
        QuadScalar::new(a.into(), b.into(), c.into(), d).unwrap()
    }

    #[test]
    fn sign_examples() {
        assert_eq!(q(-1, 1, 1, 2).signum(), 1);
        // 17² = 289 > 288 = 2·12²
        assert_eq!(q(17, -12, 1, 2).signum(), 1);
        // 49 < 50
        assert_eq!(q(7, -5, 1, 2).signum(), -1);
        assert_eq!(q(0, 0, 3, 5).signum(), 0);
    }

    #[test]
    fn rejects_bad_radicands() {
        assert_eq!(QuadScalar::new(1.into(), 1.into(), 1.into(), 4), Err(QuadError::BadRadicand(4)));
        assert_eq!(QuadScalar::new(1.into(), 1.into(), 1.into(), 1), Err(QuadError::BadRadicand(1)));
        assert_eq!(QuadScalar::new(1.into(), 1.into(), 0.into(), 2), Err(QuadError::ZeroDenominator));
        assert!(q(0, 1, 1, 2).try_add(&q(0, 1, 1, 3)).is_err());
    }

    #[test]
    fn normalizes() {
        let x = q(2, 4, -6, 5);
        assert_eq!(x, q(-1, -2, 3, 5));
        assert_eq!(q(3, 0, 6, 7).radicand(), None);
        assert_eq!(q(3, 0, 6, 7), QuadScalar::from_rational(&BigRational::new(1.into(), 2.into())));
    }

    #[test]
    fn field_arithmetic() {
        let phi = q(-1, 1, 2, 5); // (√5 − 1)/2
        // φ² + φ − 1 = 0
        let v = &(&phi * &phi) + &phi;
        assert_eq!(v, QuadScalar::from_int(1));
        assert_eq!(phi.recip().unwrap(), q(1, 1, 2, 5));
        assert_eq!(&phi / &phi, QuadScalar::from_int(1));
    }

    #[test]
    fn floor_values() {
        assert_eq!(q(0, 1, 1, 2).floor(), BigInt::from(1));
        assert_eq!(q(0, -1, 1, 2).floor(), BigInt::from(-2));
        assert_eq!(q(-1, 1, 2, 5).floor(), BigInt::from(0));
        assert_eq!(q(7, -5, 1, 2).floor(), BigInt::from(-1));
        assert_eq!(q(100, 3, 7, 3).floor(), BigInt::from(15));
        assert_eq!(QuadScalar::from_rational(&BigRational::new((-7).into(), 2.into())).floor(), BigInt::from(-4));
    }

    #[test]
    fn mixed_radicals_compare() {
        assert!(q(0, 1, 1, 2) < q(0, 1, 1, 3));
        assert!(q(1, 1, 1, 2) > q(0, 1, 1, 5));
    }

    #[test]
    fn squarefree_parts() {
        let (s, d) = squarefree_decompose(&BigUint::from(72u32));
        assert_eq!((s, d), (BigUint::from(6u32), BigUint::from(2u32)));
        let (s, d) = squarefree_decompose(&BigUint::from(49u32));
        assert_eq!((s, d), (BigUint::from(7u32), BigUint::from(1u32)));
        let (s, d) = squarefree_decompose(&BigUint::from(2u32 * 97 * 97));
        assert_eq!((s, d), (BigUint::from(97u32), BigUint::from(2u32)));
    }

    fn arb_quad() -> impl Strategy<Value = QuadScalar> {
        (-1000i64..1000, -1000i64..1000, 1i64..500, prop::sample::select(vec![2u64, 3, 5, 7]))
            .prop_map(|(a, b, c, d)| q(a, b, c, d))
    }

    proptest! {
        // exact comparison agrees with a 100-digit enclosure whenever the enclosure decides
        #[test]
        fn comparison_matches_enclosure(x in arb_quad(), y in arb_quad()) {
            let bits = 333; // about 100 decimal digits
            let ix = x.enclose(bits);
            let iy = y.enclose(bits);
            if ix.hi() < iy.lo() {
                prop_assert_eq!(x.cmp(&y), Ordering::Less);
            } else if iy.hi() < ix.lo() {
                prop_assert_eq!(x.cmp(&y), Ordering::Greater);
            }
            prop_assert!(ix.contains(&ix.midpoint()));
        }

        #[test]
        fn floor_brackets_value(x in arb_quad()) {
            let f = QuadScalar::from_rational(&BigRational::from_integer(x.floor()));
            prop_assert!(f <= x);
            prop_assert!(&f + &QuadScalar::from_int(1) > x);
        }
    }
}
