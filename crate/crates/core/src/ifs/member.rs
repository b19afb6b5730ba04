//! Attractor membership by exact preimage search.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{IfSystem, IfsError, Vector};
use crate::exact::QuadScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MembershipBudget {
    /// Longest preimage path explored.
    pub max_depth: usize,
    /// Distinct states visited.
    pub max_states: usize,
}

impl Default for MembershipBudget {
    fn default() -> Self {
        MembershipBudget { max_depth: 100_000, max_states: 1_000_000 }
    }
}

/// `x = u_{prefix}(y)` where `y` is the fixed point of `u_{cycle}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InCertificate {
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl InCertificate {
    /// Replays the preimage orbit and checks that it closes up.
    pub fn verify(&self, ifs: &IfSystem, x: &[QuadScalar]) -> bool {
        if self.cycle.is_empty() || ifs.check_point(x).is_err() {
            return false;
        }
        let step = |s: Vector, a: &usize| ifs.maps().get(*a).map(|u| u.apply_inverse(&s));
        let Some(y) = self.prefix.iter().try_fold(x.to_vec(), step) else { return false };
        self.cycle.iter().try_fold(y.clone(), step).is_some_and(|z| z == y)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MembershipVerdict {
    In(InCertificate),
    /// The point avoids every hull of this depth (and so every deeper one).
    Out(usize),
    Unknown { states: usize },
}

impl MembershipVerdict {
    pub fn is_in(&self) -> bool {
        matches!(self, MembershipVerdict::In(_))
    }

    pub fn is_out(&self) -> bool {
        matches!(self, MembershipVerdict::Out(_))
    }
}

#[derive(Clone, Copy)]
enum Mark {
    // index on the current path
    Open(usize),
    Dead(usize),
    Unknown,
}

struct Frame {
    state: Vector,
    letter: usize,
    next: usize,
    height: usize,
    unknown: bool,
}

/// Decides `x ∈ Λ` where it can.
///
/// `x` lies in a depth-`n` hull exactly when some chain of `n` inverse maps
/// keeps it in `cl W`. A depth-first search over these exact states gives
/// `Out(n)` once every chain dies, with `n` one more than the longest
/// surviving chain. A chain that returns to a state already on the path
/// makes that state the fixed point of the composed cycle, which lies in
/// `Λ`, so the start point does too. Limit points of cylinder vertices that
/// are exactly representable arise as such fixed points.
pub fn membership(ifs: &IfSystem, x: &[QuadScalar], budget: MembershipBudget) -> Result<MembershipVerdict, IfsError> {
    ifs.check_point(x)?;
    if !ifs.in_closed_w(x) {
        return Ok(MembershipVerdict::Out(0));
    }
    let n = ifs.len();
    let mut marks: BTreeMap<Vector, Mark> = BTreeMap::new();
    marks.insert(x.to_vec(), Mark::Open(0));
    let mut path = alloc::vec![Frame { state: x.to_vec(), letter: usize::MAX, next: 0, height: 1, unknown: false }];
    loop {
        let depth = path.len();
        let top = path.last_mut().expect("root stays until return");
        if top.next < n {
            let a = top.next;
            top.next += 1;
            let y = ifs.maps()[a].apply_inverse(&top.state);
            if !ifs.in_closed_w(&y) {
                continue;
            }
            match marks.get(&y).copied() {
                Some(Mark::Open(i)) => {
                    let letters: Vec<usize> = path[1..].iter().map(|f| f.letter).chain([a]).collect();
                    let (prefix, cycle) = letters.split_at(i);
                    return Ok(MembershipVerdict::In(InCertificate { prefix: prefix.to_vec(), cycle: cycle.to_vec() }));
                }
                Some(Mark::Dead(h)) => top.height = top.height.max(h + 1),
                Some(Mark::Unknown) => top.unknown = true,
                None if depth > budget.max_depth || marks.len() >= budget.max_states => top.unknown = true,
                None => {
                    marks.insert(y.clone(), Mark::Open(depth));
                    path.push(Frame { state: y, letter: a, next: 0, height: 1, unknown: false });
                }
            }
        } else {
            let done = path.pop().expect("nonempty");
            let mark = if done.unknown { Mark::Unknown } else { Mark::Dead(done.height) };
            marks.insert(done.state, mark);
            match path.last_mut() {
                Some(parent) => match mark {
                    Mark::Dead(h) => parent.height = parent.height.max(h + 1),
                    _ => parent.unknown = true,
                },
                None => {
                    return Ok(match mark {
                        Mark::Dead(h) => MembershipVerdict::Out(h),
                        _ => MembershipVerdict::Unknown { states: marks.len() },
                    })
                }
            }
        }
    }
}

/// Checks directly that no word of length `n` has `x` in its hull.
pub fn verify_out(ifs: &IfSystem, x: &[QuadScalar], n: usize) -> Result<bool, IfsError> {
    ifs.check_point(x)?;
    let mut level: BTreeSet<Vector> = BTreeSet::new();
    if ifs.in_closed_w(x) {
        level.insert(x.to_vec());
    }
    for _ in 0..n {
        level = level
            .iter()
            .flat_map(|s| ifs.maps().iter().map(move |u| u.apply_inverse(s)))
            .filter(|y| ifs.in_closed_w(y))
            .collect();
    }
    Ok(level.is_empty())
}

/// Middle-thirds Cantor set membership, always decided.
///
/// Long division gives the greedy ternary expansion, which never ends in
/// repeating 2s. A 1 followed by nothing can be rewritten as `0222…`; any
/// other 1 puts the point in a removed open interval. A repeated remainder
/// closes the period with only 0s and 2s seen.
pub fn cantor_membership(r: &BigRational) -> Result<bool, IfsError> {
    if r.is_negative() || *r > BigRational::one() {
        return Err(IfsError::OutOfRange(r.clone()));
    }
    if r.is_one() {
        return Ok(true);
    }
    let d = r.denom().clone();
    let three = BigInt::from(3);
    let mut rem = r.numer().clone();
    let mut seen = BTreeSet::new();
    while !rem.is_zero() && seen.insert(rem.clone()) {
        let (digit, next) = (&rem * &three).div_rem(&d);
        if digit.is_one() {
            return Ok(next.is_zero());
        }
        rem = next;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::ifs::geom::q;
    use crate::ifs::{cantor, cantor_dust_2d, koch, koch_z0, sierpinski_right};
    use alloc::vec;
    use proptest::prelude::*;

    fn member1(ifs: &IfSystem, r: BigRational) -> MembershipVerdict {
        membership(ifs, &[q(&r)], MembershipBudget::default()).unwrap()
    }

    #[test]
    fn cantor_examples() {
        let c = cantor();
        let v = member1(&c, rat(1, 4));
        let MembershipVerdict::In(cert) = &v else { panic!("{v:?}") };
        assert_eq!(cert.cycle.len(), 2);
        assert!(cert.verify(&c, &[q(&rat(1, 4))]));
        assert_eq!(member1(&c, rat(1, 2)), MembershipVerdict::Out(1));
        assert!(member1(&c, rat(1, 3)).is_in());
        assert_eq!(member1(&c, rat(2, 1)), MembershipVerdict::Out(0));
        assert_eq!(cantor_membership(&rat(1, 4)), Ok(true));
        assert_eq!(cantor_membership(&rat(1, 2)), Ok(false));
        assert_eq!(cantor_membership(&rat(1, 3)), Ok(true));
        assert_eq!(cantor_membership(&rat(0, 1)), Ok(true));
        assert_eq!(cantor_membership(&rat(1, 1)), Ok(true));
        assert_eq!(cantor_membership(&rat(4, 3)), Err(IfsError::OutOfRange(rat(4, 3))));
        assert_eq!(cantor_membership(&rat(-1, 9)), Err(IfsError::OutOfRange(rat(-1, 9))));
    }

    #[test]
    fn koch_examples() {
        let k = koch();
        let z0 = koch_z0();
        let v = membership(&k, &z0, MembershipBudget::default()).unwrap();
        let MembershipVerdict::In(cert) = &v else { panic!("{v:?}") };
        assert!(cert.verify(&k, &z0));
        // the apex of u₁(W) is a hull vertex but not on the curve
        let apex = vec![q(&rat(1, 6)), QuadScalar::sqrt(3).unwrap().mul_rational(&rat(1, 6))];
        let v = membership(&k, &apex, MembershipBudget::default()).unwrap();
        let MembershipVerdict::Out(n) = v else { panic!("{v:?}") };
        assert!(verify_out(&k, &apex, n).unwrap());
        // the curve meets the base only in the Cantor set
        for (r, inside) in [(rat(1, 4), true), (rat(1, 2), false), (rat(2, 3), true), (rat(5, 9), false)] {
            let v = membership(&k, &[q(&r), QuadScalar::zero()], MembershipBudget::default()).unwrap();
            assert_eq!(v.is_in(), inside, "{r}");
            assert_eq!(v.is_out(), !inside, "{r}");
        }
    }

    #[test]
    fn field_mismatch() {
        let p = vec![QuadScalar::sqrt(2).unwrap().mul_rational(&rat(1, 4)), QuadScalar::zero()];
        assert_eq!(membership(&koch(), &p, MembershipBudget::default()), Err(IfsError::FieldMismatch(3, 2)));
        assert_eq!(
            membership(&cantor(), &p, MembershipBudget::default()),
            Err(IfsError::DimensionMismatch { expected: 1, got: 2 })
        );
        // a rational system accepts any single radicand
        let x = [QuadScalar::sqrt(2).unwrap() - QuadScalar::from_int(1)];
        let small = MembershipBudget { max_depth: 50, max_states: 200 };
        assert!(!membership(&cantor(), &x, small).unwrap().is_in());
    }

    #[test]
    fn budget_gives_unknown() {
        let tiny = MembershipBudget { max_depth: 3, max_states: 1000 };
        let v = membership(&cantor(), &[q(&rat(1, 3280))], tiny).unwrap();
        assert!(matches!(v, MembershipVerdict::Unknown { .. }));
    }

    #[test]
    fn two_dimensional_systems() {
        let s = sierpinski_right();
        let v = membership(&s, &[q(&rat(1, 3)), q(&rat(1, 3))], MembershipBudget::default()).unwrap();
        assert!(v.is_out());
        assert!(membership(&s, &[q(&rat(1, 3)), q(&rat(0, 1))], MembershipBudget::default()).unwrap().is_in());
        let d = cantor_dust_2d();
        assert!(membership(&d, &[q(&rat(1, 4)), q(&rat(3, 4))], MembershipBudget::default()).unwrap().is_in());
        assert!(membership(&d, &[q(&rat(1, 4)), q(&rat(1, 2))], MembershipBudget::default()).unwrap().is_out());
    }

    #[test]
    fn agrees_with_cantor_oracle_on_triadic_rationals() {
        let c = cantor();
        for m in 0..=7u32 {
            let den = 3i64.pow(m);
            for k in 0..=den {
                let r = rat(k, den);
                let v = member1(&c, r.clone());
                assert_eq!(v.is_in(), cantor_membership(&r).unwrap(), "{r}");
                assert_eq!(v.is_out(), !v.is_in(), "{r}");
            }
        }
    }

    #[test]
    fn agrees_with_cantor_oracle_on_random_rationals() {
        use rand_chacha::rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let c = cantor();
        for _ in 0..1000 {
            let den = (rng.next_u32() % 10_000 + 1) as i64;
            let num = (rng.next_u32() as i64) % (den + 1);
            let r = rat(num, den);
            let v = member1(&c, r.clone());
            assert!(!matches!(v, MembershipVerdict::Unknown { .. }), "{r}");
            assert_eq!(v.is_in(), cantor_membership(&r).unwrap(), "{r}");
        }
    }

    proptest! {
        #[test]
        fn out_is_monotone(num in 0i64..2000, den in 1i64..2000, extra in 0usize..3) {
            prop_assume!(num <= den);
            let c = cantor();
            let x = [q(&rat(num, den))];
            if let MembershipVerdict::Out(n) = membership(&c, &x, MembershipBudget::default()).unwrap() {
                prop_assert!(verify_out(&c, &x, n + extra).unwrap());
                if n > 0 {
                    prop_assert!(!verify_out(&c, &x, n - 1).unwrap());
                }
            }
        }

        #[test]
        fn koch_verdicts_reverify(a in 0i64..60, b in 0i64..60) {
            let k = koch();
            let x = vec![q(&rat(a, 60)), QuadScalar::sqrt(3).unwrap().mul_rational(&rat(b, 120))];
            let budget = MembershipBudget { max_depth: 40, max_states: 4000 };
            match membership(&k, &x, budget).unwrap() {
                MembershipVerdict::In(cert) => prop_assert!(cert.verify(&k, &x)),
                MembershipVerdict::Out(n) => {
                    prop_assert!(verify_out(&k, &x, n).unwrap());
                    prop_assert!(verify_out(&k, &x, n + 1).unwrap());
                }
                MembershipVerdict::Unknown { .. } => {}
            }
        }
    }
}
