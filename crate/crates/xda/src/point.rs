//! Point specs.
//!
//! A coordinate is one of
//!
//! * `rat:<p>/<q>` (or `rat:<n>`, or a bare `<p>/<q>` / `<n>`)
//! * `quad:(<a>+<b>*sqrt(<D>))/<c>`, where `/<c>` is optional and the sign
//!   between the terms may be `-`
//! * `dig:<base>:per:<digits>`, the repeating block `0.(digits)`
//! * `dig:<base>:tm:<d0><d1>`, Thue–Morse over two digits
//! * `dig:<base>:seed:<u64>[:<digits>]`, seeded digits from the given
//!   alphabet, `{0, base-1}` by default
//!
//! A point is a comma-separated list of coordinates. The `quad:` prefix may
//! be dropped, which makes the `Display` form of a [`QuadScalar`] parse back.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};
use regex::Regex;
use xda_core::exact::{squarefree_decompose, TargetError};
use xda_core::{Coordinate, DigitGenerator, DigitStream, QuadScalar, TargetPoint};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PointError {
    #[error("empty point spec")]
    Empty,
    #[error("cannot parse `{0}` as a coordinate")]
    Syntax(String),
    #[error("`{0}`: zero denominator")]
    ZeroDenominator(String),
    #[error("`{spec}`: {source}")]
    Target { spec: String, source: TargetError },
    #[error("`{0}` is not an exact number")]
    NotExact(String),
    #[error("expected a point of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("coordinates `{0}` mix square roots of different fields")]
    MixedFields(String),
}

fn quad_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\(\s*([+-]?\d+)\s*([+-])\s*([+-]?\d+)\s*\*\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*(?:/\s*(\d+))?$")
            .expect("valid regex")
    })
}

fn int(s: &str, whole: &str) -> Result<BigInt, PointError> {
    s.trim().parse::<BigInt>().map_err(|_| PointError::Syntax(whole.to_string()))
}

/// `p/q` or `n`.
pub fn parse_rational(s: &str) -> Result<BigRational, PointError> {
    let t = s.trim();
    let (p, q) = match t.split_once('/') {
        Some((p, q)) => (int(p, t)?, int(q, t)?),
        None => (int(t, t)?, BigInt::one()),
    };
    if q.is_zero() {
        return Err(PointError::ZeroDenominator(t.to_string()));
    }
    Ok(BigRational::new(p, q))
}

/// `(a + b√D)/c` with `D` reduced to its squarefree part.
fn quad(a: BigInt, b: BigInt, d: BigUint, c: BigInt, whole: &str) -> Result<QuadScalar, PointError> {
    if c.is_zero() {
        return Err(PointError::ZeroDenominator(whole.to_string()));
    }
    let (square, core) = squarefree_decompose(&d);
    let b = b * BigInt::from_biguint(Sign::Plus, square);
    let core: u64 = core.try_into().map_err(|_| PointError::Syntax(whole.to_string()))?;
    if core == 1 || b.is_zero() {
        let extra = if core == 1 { b } else { BigInt::zero() };
        return Ok(QuadScalar::from_rational(&BigRational::new(a + extra, c)));
    }
    QuadScalar::new(a, b, c, core).map_err(|_| PointError::Syntax(whole.to_string()))
}

fn parse_quad(body: &str, whole: &str) -> Result<QuadScalar, PointError> {
    let caps = quad_re().captures(body.trim()).ok_or_else(|| PointError::Syntax(whole.to_string()))?;
    let a = int(&caps[1], whole)?;
    let mut b = int(&caps[3], whole)?;
    if &caps[2] == "-" {
        b = -b;
    }
    let d: BigUint = caps[4].parse().map_err(|_| PointError::Syntax(whole.to_string()))?;
    let c = caps.get(5).map_or(Ok(BigInt::one()), |m| int(m.as_str(), whole))?;
    quad(a, b, d, c, whole)
}

fn digit_list(s: &str, base: u32, whole: &str) -> Result<Vec<u8>, PointError> {
    if s.is_empty() {
        return Err(PointError::Syntax(whole.to_string()));
    }
    s.chars()
        .map(|ch| {
            ch.to_digit(36).filter(|&d| d < base.min(36)).map(|d| d as u8).ok_or_else(|| PointError::Target {
                spec: whole.to_string(),
                source: TargetError::DigitOutOfRange { digit: ch.to_digit(36).unwrap_or(255) as u8, base },
            })
        })
        .collect()
}

fn parse_digits(body: &str, whole: &str) -> Result<DigitStream, PointError> {
    let syntax = || PointError::Syntax(whole.to_string());
    let mut parts = body.split(':');
    let base: u32 = parts.next().ok_or_else(syntax)?.trim().parse().map_err(|_| syntax())?;
    let kind = parts.next().ok_or_else(syntax)?;
    let arg = parts.next().ok_or_else(syntax)?;
    let extra = parts.next();
    if parts.next().is_some() || (extra.is_some() && kind != "seed") {
        return Err(syntax());
    }
    let generator = match kind {
        "per" => DigitGenerator::Periodic(digit_list(arg, base, whole)?),
        "tm" => match digit_list(arg, base, whole)?.as_slice() {
            [a, b] => DigitGenerator::ThueMorse(*a, *b),
            _ => return Err(syntax()),
        },
        "seed" => {
            let seed: u64 = arg.trim().parse().map_err(|_| syntax())?;
            let alphabet = match extra {
                Some(ds) => digit_list(ds, base, whole)?,
                None if base >= 2 => vec![0, (base - 1).min(255) as u8],
                None => vec![0],
            };
            DigitGenerator::Seeded { seed, alphabet }
        }
        _ => return Err(syntax()),
    };
    DigitStream::new(base, generator).map_err(|source| PointError::Target { spec: whole.to_string(), source })
}

pub fn parse_coordinate(spec: &str) -> Result<Coordinate, PointError> {
    let s = spec.trim();
    if s.is_empty() {
        return Err(PointError::Empty);
    }
    if let Some(body) = s.strip_prefix("rat:") {
        return Ok(Coordinate::Rational(parse_rational(body)?));
    }
    if let Some(body) = s.strip_prefix("quad:").or_else(|| s.starts_with('(').then_some(s)) {
        let v = parse_quad(body, s)?;
        return Ok(match v.to_rational() {
            Some(r) => Coordinate::Rational(r),
            None => Coordinate::Quadratic(v),
        });
    }
    if let Some(body) = s.strip_prefix("dig:") {
        return Ok(Coordinate::Digits(parse_digits(body, s)?));
    }
    Ok(Coordinate::Rational(parse_rational(s)?))
}

pub fn parse_point(spec: &str) -> Result<TargetPoint, PointError> {
    if spec.trim().is_empty() {
        return Err(PointError::Empty);
    }
    let coords = spec.split(',').map(parse_coordinate).collect::<Result<Vec<_>, _>>()?;
    TargetPoint::new(coords).map_err(|source| PointError::Target { spec: spec.to_string(), source })
}

/// A point whose coordinates must be known exactly.
pub fn parse_exact_point(spec: &str) -> Result<Vec<QuadScalar>, PointError> {
    let x = parse_point(spec)?;
    let v = x.exact().ok_or_else(|| PointError::NotExact(spec.to_string()))?;
    let mut field = None;
    for c in &v {
        if let Some(d) = c.radicand() {
            if field.is_some_and(|f| f != d) {
                return Err(PointError::MixedFields(spec.to_string()));
            }
            field = Some(d);
        }
    }
    Ok(v)
}

pub fn parse_scalar(spec: &str) -> Result<QuadScalar, PointError> {
    parse_coordinate(spec)?.exact().ok_or_else(|| PointError::NotExact(spec.to_string()))
}

pub fn parse_rational_point(spec: &str) -> Result<Vec<BigRational>, PointError> {
    parse_exact_point(spec)?
        .into_iter()
        .map(|c| c.to_rational().ok_or_else(|| PointError::NotExact(spec.to_string())))
        .collect()
}

pub fn expect_dim<T>(v: T, got: usize, expected: usize) -> Result<T, PointError> {
    if got == expected {
        Ok(v)
    } else {
        Err(PointError::Dimension { expected, got })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use xda_core::exact::rat;

    #[test]
    fn golden_conjugate() {
        let x = parse_coordinate("quad:(-1+1*sqrt(5))/2").unwrap();
        let want = QuadScalar::new((-1).into(), 1.into(), 2.into(), 5).unwrap();
        assert_eq!(x, Coordinate::Quadratic(want));
    }

    #[test]
    fn quad_minus_and_no_denominator() {
        let x = parse_scalar("quad:(3-2*sqrt(2))").unwrap();
        assert_eq!(x, QuadScalar::new(3.into(), (-2).into(), 1.into(), 2).unwrap());
    }

    #[test]
    fn quad_reduces_radicand() {
        // 1·√12 = 2√3
        let x = parse_scalar("quad:(0+1*sqrt(12))/4").unwrap();
        assert_eq!(x, QuadScalar::new(0.into(), 1.into(), 2.into(), 3).unwrap());
        // √9 collapses to a rational
        assert_eq!(parse_coordinate("quad:(1+1*sqrt(9))/2").unwrap(), Coordinate::Rational(rat(2, 1)));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_coordinate("rat:6/8").unwrap(), Coordinate::Rational(rat(3, 4)));
        assert_eq!(parse_coordinate("-2/3").unwrap(), Coordinate::Rational(rat(-2, 3)));
        assert_eq!(parse_coordinate("rat:5").unwrap(), Coordinate::Rational(rat(5, 1)));
        assert!(matches!(parse_coordinate("rat:1/0"), Err(PointError::ZeroDenominator(_))));
        assert!(matches!(parse_coordinate("rat:x"), Err(PointError::Syntax(_))));
    }

    #[test]
    fn digit_streams() {
        let tm = parse_coordinate("dig:3:tm:02").unwrap();
        let Coordinate::Digits(s) = tm else { panic!() };
        assert_eq!(s.generator(), &DigitGenerator::ThueMorse(0, 2));
        assert_eq!(s.digits(8), vec![0, 2, 2, 0, 2, 0, 0, 2]);

        let Coordinate::Digits(s) = parse_coordinate("dig:3:seed:7").unwrap() else { panic!() };
        assert_eq!(s.generator(), &DigitGenerator::Seeded { seed: 7, alphabet: vec![0, 2] });
        let Coordinate::Digits(s) = parse_coordinate("dig:10:seed:7:135").unwrap() else { panic!() };
        assert_eq!(s.alphabet(), vec![1, 3, 5]);

        // 0.(02) in base 3 = 2/8 = 1/4
        let per = parse_coordinate("dig:3:per:02").unwrap();
        assert_eq!(per.exact(), Some(QuadScalar::from_rational(&rat(1, 4))));

        assert!(matches!(parse_coordinate("dig:3:tm:05"), Err(PointError::Target { .. })));
        assert!(parse_coordinate("dig:3:tm:0").is_err());
        assert!(parse_coordinate("dig:3:per:1:2").is_err());
        assert!(parse_coordinate("dig:1:per:0").is_err());
    }

    #[test]
    fn vectors() {
        let x = parse_point("quad:(0+1*sqrt(2))/2,quad:(0+1*sqrt(2))/2").unwrap();
        assert_eq!(x.dim(), 2);
        assert!(parse_point("").is_err());
        assert!(parse_point("1/2,").is_err());
        assert!(matches!(parse_exact_point("dig:3:tm:02"), Err(PointError::NotExact(_))));
        assert!(matches!(
            parse_exact_point("quad:(0+1*sqrt(2)),quad:(0+1*sqrt(3))"),
            Err(PointError::MixedFields(_))
        ));
        assert_eq!(parse_rational_point("1/2, 3/4").unwrap(), vec![rat(1, 2), rat(3, 4)]);
    }

    proptest! {
        #[test]
        fn rational_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = rat(p, q);
            prop_assert_eq!(parse_coordinate(&format!("rat:{}", r)).unwrap(), Coordinate::Rational(r.clone()));
            prop_assert_eq!(parse_coordinate(&format!("{}/{}", p, q)).unwrap(), Coordinate::Rational(r));
        }

        #[test]
        fn quad_round_trip(a in -50i64..50, b in 1i64..50, c in 1i64..50, d in prop::sample::select(vec![2u64, 3, 5, 6, 7, 10])) {
            let want = QuadScalar::new(a.into(), b.into(), c.into(), d).unwrap();
            let text = format!("quad:({}+{}*sqrt({}))/{}", a, b, d, c);
            prop_assert_eq!(parse_scalar(&text).unwrap(), want.clone());
            prop_assert_eq!(parse_scalar(&want.to_string()).unwrap(), want);
        }
    }
}
