//! Cross-module properties through the public API only.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use xda_core::contfrac::expand;
use xda_core::exact::{rat, squarefree_decompose, DEFAULT_MAX_PRECISION};
use xda_core::extrinsic::circle_exclusion;
use xda_core::ifs::{cantor, cantor_membership, membership, MembershipBudget, MembershipVerdict};
use xda_core::lattice::{claim23_certify, good_pair_search, quality_le, SearchParams};
use xda_core::rap::{hausdorff_to_unit, prop26_family, NormalizedRap};
use xda_core::{Coordinate, QuadScalar, TargetPoint};

const CAP: u32 = DEFAULT_MAX_PRECISION;

fn squarefree() -> impl Strategy<Value = u64> {
    (2u64..500).prop_filter("squarefree", |d| squarefree_decompose(&(*d).into()).1 == (*d).into())
}

/// The fractional part of `√d`.
fn frac_sqrt(d: u64) -> QuadScalar {
    let s = QuadScalar::sqrt(d).unwrap();
    s.add_rational(&-BigRational::from_integer(s.floor()))
}

fn ternary(digits: &[u8]) -> BigRational {
    let mut x = BigRational::zero();
    let mut w = rat(1, 3);
    for d in digits {
        x += &w * BigRational::from_integer((*d).into());
        w /= BigRational::from_integer(3.into());
    }
    x
}

fn generic_in(r: &BigRational) -> Option<bool> {
    match membership(&cantor(), &[QuadScalar::from_rational(r)], MembershipBudget::default()).unwrap() {
        MembershipVerdict::In(_) => Some(true),
        MembershipVerdict::Out(_) => Some(false),
        MembershipVerdict::Unknown { .. } => None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convergents_of_quadratic_irrationals(d in squarefree()) {
        let x = frac_sqrt(d);
        let cf = expand(&Coordinate::Quadratic(x.clone()), 12, CAP).unwrap();
        let conv = cf.convergents();
        // x lies in (0, 1), so the chain starts from p_0/q_0 = 0/1
        let mut prev = (BigInt::zero(), BigInt::one());
        for (k, (p, q)) in conv.iter().enumerate() {
            // p_n q_{n−1} − p_{n−1} q_n = (−1)^{n−1}, with n = k + 1
            let det = p * &prev.1 - &prev.0 * q;
            let expected = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            prop_assert_eq!(det, expected);
            // |x − p/q| < 1/q²
            let err = x.add_rational(&-BigRational::new(p.clone(), q.clone())).abs();
            prop_assert!(err < QuadScalar::from_rational(&BigRational::new(BigInt::one(), q * q)));
            prev = (p.clone(), q.clone());
        }
    }

    #[test]
    fn good_pairs_feed_the_progression(d in squarefree(), q0 in 2u64..5000) {
        let x = TargetPoint::scalar(Coordinate::Quadratic(QuadScalar::sqrt(d).unwrap()));
        let pair = good_pair_search(&x, &SearchParams::with_min_q0(q0)).unwrap();
        prop_assert!(pair.verify(&x, CAP).is_ok());
        prop_assert!(pair.r0.q >= BigInt::from(q0));
        for i in 0..16u64 {
            let r = pair.r0.add_scaled(&pair.r_inf, &BigInt::from(i));
            prop_assert!(claim23_certify(&x, &r, i, CAP).unwrap());
            // in dimension one the same bound reads q²|x − p/q| ≤ (1+i)²
            let c = BigRational::from_integer(BigInt::from((1 + i) * (1 + i)));
            prop_assert!(quality_le(&x, &r, &c, CAP).unwrap());
        }
    }

    #[test]
    fn families_normalize_close_to_the_unit_interval(
        v in prop::array::uniform4(1i64..10_000),
        n in 1usize..12,
    ) {
        let cert = prop26_family(&[v[0].into()], &v[1].into(), &[v[2].into()], &v[3].into(), n);
        // a zero increment means p0/q0 = p∞/q∞
        if v[0] * v[3] == v[1] * v[2] {
            prop_assert!(cert.is_err());
            return Ok(());
        }
        let cert = cert.unwrap();
        prop_assert!(cert.verify_with(&rat(2, 1)).is_ok());
        let nr = NormalizedRap::from_certificate(&cert).unwrap();
        prop_assert!(hausdorff_to_unit(&nr) <= nr.bound());
    }

    #[test]
    fn cantor_oracles_on_ternary_strings(
        head in prop::collection::vec(prop::sample::select(vec![0u8, 2]), 0..10),
        tail in prop::collection::vec(0u8..3, 1..6),
    ) {
        let inside = ternary(&head);
        prop_assert!(cantor_membership(&inside).unwrap());
        prop_assert_eq!(generic_in(&inside), Some(true));
        // a middle-third digit followed by a nonzero digit is strictly inside a gap
        let mut gap = head.clone();
        gap.push(1);
        gap.extend(tail.iter().map(|t| t.max(&1)));
        let outside = ternary(&gap);
        prop_assert!(!cantor_membership(&outside).unwrap());
        prop_assert_eq!(generic_in(&outside), Some(false));
    }

    #[test]
    fn circle_distance_solves_the_radius_identity(a in -400i64..400, b in -400i64..400, q in 1i64..200) {
        prop_assume!(a * a + b * b != q * q);
        let cb = circle_exclusion(&[rat(a, q), rat(b, q)]).unwrap();
        let r2 = QuadScalar::from_rational(&rat(a * a + b * b, q * q));
        let one = QuadScalar::from_int(1);
        let s = if a * a + b * b > q * q { one.try_add(&cb.distance) } else { one.try_sub(&cb.distance) }.unwrap();
        prop_assert_eq!(s.try_mul(&s).unwrap(), r2);
        prop_assert!(cb.lower <= cb.distance);
    }
}
