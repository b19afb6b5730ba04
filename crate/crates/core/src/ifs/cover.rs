//! Minimal covering words for a region.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::Signed;

use super::geom::{self, q};
use super::{field_of, Cylinder, Hull, IfSystem, IfsError, Vector};
use crate::exact::QuadScalar;

/// A closed region with exact diameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Region {
    Interval { lo: QuadScalar, hi: QuadScalar },
    Ball { center: Vector, radius: BigRational },
    /// Convex, either orientation.
    Polygon(Vec<Vector>),
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Interval { .. } => 1,
            Region::Ball { center, .. } => center.len(),
            Region::Polygon(_) => 2,
        }
    }

    /// `diam(S)²`.
    pub fn diam2(&self) -> QuadScalar {
        match self {
            Region::Interval { lo, hi } => (hi - lo).pow(2),
            Region::Ball { radius, .. } => q(&(radius * radius * BigRational::from_integer(4.into()))),
            Region::Polygon(vs) => {
                let mut best = QuadScalar::zero();
                for i in 0..vs.len() {
                    for j in i + 1..vs.len() {
                        let d = geom::dist2(&vs[i], &vs[j]);
                        if d > best {
                            best = d;
                        }
                    }
                }
                best
            }
        }
    }

    fn normalized(&self) -> Result<Region, IfsError> {
        match self {
            Region::Interval { lo, hi } if lo > hi => Err(IfsError::DegenerateDiameter),
            Region::Ball { radius, .. } if radius.is_negative() => Err(IfsError::DegenerateDiameter),
            Region::Ball { center, radius } if center.len() == 1 => Ok(Region::Interval {
                lo: center[0].add_rational(&-radius),
                hi: center[0].add_rational(radius),
            }),
            Region::Polygon(vs) => {
                let mut vs = vs.clone();
                if vs.len() >= 3 && geom::area2(&vs).signum() < 0 {
                    vs.reverse();
                }
                Ok(Region::Polygon(vs))
            }
            r => Ok(r.clone()),
        }
    }

    fn field(&self) -> Result<Option<u64>, IfsError> {
        match self {
            Region::Interval { lo, hi } => field_of(None, [lo, hi]),
            Region::Ball { center, .. } => field_of(None, center),
            Region::Polygon(vs) => field_of(None, vs.iter().flatten()),
        }
    }

    /// The closed region meets a closed hull.
    pub fn meets(&self, hull: &Hull) -> bool {
        match (self, hull) {
            (Region::Interval { lo, hi }, Hull::Interval(a, b)) => a <= hi && lo <= b,
            (Region::Polygon(p), Hull::Polygon(h)) => geom::closed_polygons_meet(p, h),
            (Region::Ball { center, radius }, Hull::Polygon(h)) => {
                geom::polygon_meets_ball(h, center, &q(&(radius * radius)))
            }
            (Region::Polygon(p), Hull::Ball(c, r)) => geom::polygon_meets_ball(p, c, &q(&(r * r))),
            (Region::Ball { center, radius }, Hull::Ball(c, r)) => {
                let s = radius + r;
                geom::dist2(center, c) <= q(&(&s * &s))
            }
            (Region::Interval { lo, hi }, Hull::Ball(c, r)) => {
                c[0].add_rational(&-r) <= *hi && *lo <= c[0].add_rational(r)
            }
            _ => false,
        }
    }
}

/// The cover `A` of a region `S`: minimal words `ω` with
/// `‖u_ω'‖ ≤ diam(S)` and `u_ω(cl W) ∩ S ≠ ∅`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    pub words: Vec<Vec<usize>>,
    pub ratios: Vec<BigRational>,
    pub diam2: QuadScalar,
    pub gamma: BigRational,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Every ratio lies in `(γ·diam, diam]` and no word is a prefix of
    /// another.
    pub fn check(&self) -> bool {
        let g2 = q(&(&self.gamma * &self.gamma));
        let bounds = self.ratios.iter().all(|r| {
            let r2 = q(&(r * r));
            r2 <= self.diam2 && r2 > &g2 * &self.diam2
        });
        let prefix_free = self.words.iter().enumerate().all(|(i, w)| {
            self.words.iter().enumerate().all(|(j, v)| i == j || !(v.len() <= w.len() && w[..v.len()] == v[..]))
        });
        bounds && prefix_free
    }
}

/// Breadth-first enumeration of the minimal words, in shortlex order.
///
/// Hulls are images of `cl W`, so a word may be included whose cylinder of
/// the attractor misses `S`; the covering property `S ∩ Λ ⊆ ⋃ u_ω(Λ)` is
/// unaffected.
pub fn cover(ifs: &IfSystem, region: &Region) -> Result<Cover, IfsError> {
    if region.dim() != ifs.dim() {
        return Err(IfsError::DimensionMismatch { expected: ifs.dim(), got: region.dim() });
    }
    if let (Some(a), Some(b)) = (ifs.field(), region.field()?) {
        if a != b {
            return Err(IfsError::FieldMismatch(a, b));
        }
    }
    let region = region.normalized()?;
    let diam2 = region.diam2();
    if diam2.is_zero() {
        return Err(IfsError::DegenerateDiameter);
    }
    let mut words = Vec::new();
    let mut ratios = Vec::new();
    let mut queue: VecDeque<Cylinder> = VecDeque::from(vec![ifs.root()]);
    while let Some(c) = queue.pop_front() {
        if !region.meets(&c.hull) {
            continue;
        }
        if q(&(c.ratio() * c.ratio())) <= diam2 {
            ratios.push(c.ratio().clone());
            words.push(c.word);
        } else {
            queue.extend(ifs.children(&c));
        }
    }
    Ok(Cover { words, ratios, diam2, gamma: ifs.gamma() })
}
