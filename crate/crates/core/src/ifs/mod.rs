//! Finite iterated function systems of similarities with exact coefficients.
//!
//! Every map is `x ↦ r·O·x + t` with `r` rational, `O` orthogonal and all
//! entries in one field `Q(√D)`. Geometry is exact in dimensions 1 and 2.
//! The open set `W` is an interval, a convex polygon or a ball, and a
//! cylinder's hull is the image of `cl W`.

mod builtins;
mod cover;
pub(crate) mod geom;
mod member;
mod osc;
mod scan;

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::exact::QuadScalar;

pub use builtins::{builtin, cantor, cantor_dust_2d, koch, koch_z0, sierpinski_right, BUILTINS};
pub use cover::{cover, Cover, Region};
pub use member::{cantor_membership, membership, verify_out, InCertificate, MembershipBudget, MembershipVerdict};
pub use osc::{check_osc, OscViolation};
pub use scan::{
    line_porosity, segment_scan, CoveredSegment, GapWitness, Line, PorosityCertificate, PorosityParams, SegmentScan,
};

use geom::{add, q, zero};

/// A point or vector with exact coordinates.
pub type Vector = Vec<QuadScalar>;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IfsError {
    #[error("dimension {0} is not supported (exact geometry covers 1 and 2)")]
    UnsupportedDimension(usize),
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("contraction ratio must lie in (0, 1)")]
    BadRatio,
    #[error("linear part is not orthogonal")]
    NotOrthogonal,
    #[error("open set is empty, unbounded or not convex")]
    BadOpenSet,
    #[error("coordinates mix sqrt({0}) and sqrt({1})")]
    FieldMismatch(u64, u64),
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("region has zero diameter")]
    DegenerateDiameter,
    #[error("this operation needs an interval or polygonal open set")]
    UnsupportedOpenSet,
    #[error("{0} lies outside [0, 1]")]
    OutOfRange(BigRational),
    #[error("line direction is zero")]
    ZeroDirection,
    #[error("{0}")]
    NoGapFound(Box<GapMiss>),
}

/// A porosity scale at which no gap was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapMiss {
    pub center: QuadScalar,
    pub radius: BigRational,
    pub epsilon: BigRational,
    /// Deepest level searched.
    pub depth: usize,
}

impl core::fmt::Display for GapMiss {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "no gap of relative size {} around {} at radius {} (searched to depth {})",
            self.epsilon, self.center, self.radius, self.depth
        )
    }
}

/// Joins radicands, failing on two different ones.
pub(crate) fn join_field(acc: Option<u64>, x: &QuadScalar) -> Result<Option<u64>, IfsError> {
    match (acc, x.radicand()) {
        (Some(a), Some(b)) if a != b => Err(IfsError::FieldMismatch(a, b)),
        (None, b) => Ok(b),
        (a, _) => Ok(a),
    }
}

pub(crate) fn field_of<'a>(
    acc: Option<u64>,
    xs: impl IntoIterator<Item = &'a QuadScalar>,
) -> Result<Option<u64>, IfsError> {
    xs.into_iter().try_fold(acc, join_field)
}

/// A contracting similarity `x ↦ r·O·x + t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Similarity {
    ratio: BigRational,
    // rows
    orth: Vec<Vector>,
    translation: Vector,
}

impl Similarity {
    /// Checks `0 < r`, `OᵀO = I` and a common field. Ratios `≥ 1` are
    /// allowed here so that compositions and the identity can be
    /// represented; [`IfSystem::new`] insists on contractions.
    pub fn new(ratio: BigRational, orth: Vec<Vector>, translation: Vector) -> Result<Self, IfsError> {
        let d = translation.len();
        if d == 0 || d > 2 {
            return Err(IfsError::UnsupportedDimension(d));
        }
        if orth.len() != d || orth.iter().any(|row| row.len() != d) {
            return Err(IfsError::DimensionMismatch { expected: d, got: orth.len() });
        }
        if !ratio.is_positive() {
            return Err(IfsError::BadRatio);
        }
        field_of(field_of(None, orth.iter().flatten())?, &translation)?;
        for i in 0..d {
            for j in 0..d {
                let s = (0..d).fold(zero(), |acc, k| acc + &orth[k][i] * &orth[k][j]);
                let want = if i == j { QuadScalar::from_int(1) } else { zero() };
                if s != want {
                    return Err(IfsError::NotOrthogonal);
                }
            }
        }
        Ok(Similarity { ratio, orth, translation })
    }

    /// `x ↦ r·x + t`.
    pub fn homothety(ratio: BigRational, translation: Vector) -> Result<Self, IfsError> {
        let d = translation.len();
        let orth = (0..d)
            .map(|i| (0..d).map(|j| QuadScalar::from_int(i64::from(i == j))).collect())
            .collect();
        Self::new(ratio, orth, translation)
    }

    /// A planar map with linear part `r·[[c, −s], [s, c]]`, or
    /// `r·[[c, s], [s, −c]]` when `reflect` is set.
    pub fn planar(
        ratio: BigRational,
        cos: QuadScalar,
        sin: QuadScalar,
        reflect: bool,
        translation: Vector,
    ) -> Result<Self, IfsError> {
        let orth = if reflect {
            vec![vec![cos.clone(), sin.clone()], vec![sin, -cos]]
        } else {
            vec![vec![cos.clone(), -&sin], vec![sin, cos]]
        };
        Self::new(ratio, orth, translation)
    }

    pub fn identity(d: usize) -> Result<Self, IfsError> {
        Self::homothety(BigRational::one(), vec![zero(); d])
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    /// `‖u'‖`.
    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    pub fn orthogonal(&self) -> &[Vector] {
        &self.orth
    }

    pub fn translation(&self) -> &[QuadScalar] {
        &self.translation
    }

    pub fn field(&self) -> Option<u64> {
        field_of(field_of(None, self.orth.iter().flatten()).ok().flatten(), &self.translation).ok().flatten()
    }

    fn linear(&self, x: &[QuadScalar]) -> Vector {
        self.orth.iter().map(|row| geom::dot(row, x).mul_rational(&self.ratio)).collect()
    }

    pub fn apply(&self, x: &[QuadScalar]) -> Vector {
        add(&self.linear(x), &self.translation)
    }

    /// `u⁻¹(y) = Oᵀ(y − t)/r`.
    pub fn apply_inverse(&self, y: &[QuadScalar]) -> Vector {
        let v = geom::sub(y, &self.translation);
        let inv = self.ratio.recip();
        (0..self.dim())
            .map(|j| (0..self.dim()).fold(zero(), |acc, k| acc + &self.orth[k][j] * &v[k]).mul_rational(&inv))
            .collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Similarity) -> Similarity {
        let d = self.dim();
        let orth = (0..d)
            .map(|i| (0..d).map(|j| (0..d).fold(zero(), |acc, k| acc + &self.orth[i][k] * &inner.orth[k][j])).collect())
            .collect();
        Similarity { ratio: &self.ratio * &inner.ratio, orth, translation: self.apply(&inner.translation) }
    }

    /// `det O > 0`.
    pub fn preserves_orientation(&self) -> bool {
        match self.dim() {
            1 => self.orth[0][0].signum() > 0,
            _ => (&self.orth[0][0] * &self.orth[1][1] - &self.orth[0][1] * &self.orth[1][0]).signum() > 0,
        }
    }
}

/// The open set of the open set condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpenSet {
    Interval { lo: QuadScalar, hi: QuadScalar },
    /// Convex, counterclockwise.
    Polygon(Vec<Vector>),
    Ball { center: Vector, radius: BigRational },
}

impl OpenSet {
    pub fn interval(lo: QuadScalar, hi: QuadScalar) -> Result<Self, IfsError> {
        if lo >= hi {
            return Err(IfsError::BadOpenSet);
        }
        field_of(None, [&lo, &hi])?;
        Ok(OpenSet::Interval { lo, hi })
    }

    /// Accepts either orientation; stores counterclockwise.
    pub fn polygon(mut vertices: Vec<Vector>) -> Result<Self, IfsError> {
        if vertices.iter().any(|v| v.len() != 2) {
            return Err(IfsError::DimensionMismatch { expected: 2, got: vertices.first().map_or(0, Vec::len) });
        }
        field_of(None, vertices.iter().flatten())?;
        if vertices.len() >= 3 && geom::area2(&vertices).signum() < 0 {
            vertices.reverse();
        }
        if !geom::is_strictly_convex_ccw(&vertices) {
            return Err(IfsError::BadOpenSet);
        }
        Ok(OpenSet::Polygon(vertices))
    }

    pub fn ball(center: Vector, radius: BigRational) -> Result<Self, IfsError> {
        if !radius.is_positive() || center.is_empty() {
            return Err(IfsError::BadOpenSet);
        }
        if center.len() > 2 {
            return Err(IfsError::UnsupportedDimension(center.len()));
        }
        field_of(None, &center)?;
        Ok(OpenSet::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            OpenSet::Interval { .. } => 1,
            OpenSet::Polygon(_) => 2,
            OpenSet::Ball { center, .. } => center.len(),
        }
    }

    pub fn closure(&self) -> Hull {
        Hull::image(self, &Similarity::identity(self.dim()).expect("dimension checked"))
    }

    fn field(&self) -> Result<Option<u64>, IfsError> {
        match self {
            OpenSet::Interval { lo, hi } => field_of(None, [lo, hi]),
            OpenSet::Polygon(v) => field_of(None, v.iter().flatten()),
            OpenSet::Ball { center, .. } => field_of(None, center),
        }
    }
}

/// `u(cl W)` for a similarity `u`, in closed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hull {
    Interval(QuadScalar, QuadScalar),
    Polygon(Vec<Vector>),
    Ball(Vector, BigRational),
}

impl Hull {
    pub fn image(w: &OpenSet, u: &Similarity) -> Hull {
        match w {
            OpenSet::Interval { lo, hi } => {
                let a = u.apply(core::slice::from_ref(lo)).remove(0);
                let b = u.apply(core::slice::from_ref(hi)).remove(0);
                if a <= b {
                    Hull::Interval(a, b)
                } else {
                    Hull::Interval(b, a)
                }
            }
            OpenSet::Polygon(vs) => {
                let mut img: Vec<Vector> = vs.iter().map(|v| u.apply(v)).collect();
                if !u.preserves_orientation() {
                    img.reverse();
                }
                Hull::Polygon(img)
            }
            OpenSet::Ball { center, radius } => Hull::Ball(u.apply(center), radius * u.ratio()),
        }
    }

    /// Closed containment.
    pub fn contains(&self, p: &[QuadScalar]) -> bool {
        match self {
            Hull::Interval(a, b) => *a <= p[0] && p[0] <= *b,
            Hull::Polygon(vs) => geom::in_closed_polygon(vs, p),
            Hull::Ball(c, r) => geom::dist2(c, p) <= q(&(r * r)),
        }
    }

    /// Vertices of an interval or polygon hull; empty for balls.
    pub fn vertices(&self) -> Vec<Vector> {
        match self {
            Hull::Interval(a, b) => vec![vec![a.clone()], vec![b.clone()]],
            Hull::Polygon(vs) => vs.clone(),
            Hull::Ball(..) => Vec::new(),
        }
    }

    /// `other ⊆ self`, exactly.
    pub fn contains_hull(&self, other: &Hull) -> bool {
        match (self, other) {
            (Hull::Ball(c1, r1), Hull::Ball(c2, r2)) => {
                let slack = r1 - r2;
                !slack.is_negative() && geom::dist2(c1, c2) <= q(&(&slack * &slack))
            }
            (_, Hull::Ball(..)) | (Hull::Ball(..), _) => false,
            _ => other.vertices().iter().all(|v| self.contains(v)),
        }
    }

    /// Parameter interval of `{s : p + s·dir ∈ hull}`.
    pub(crate) fn clip_line(&self, p: &[QuadScalar], dir: &[QuadScalar]) -> Result<Option<(QuadScalar, QuadScalar)>, IfsError> {
        match self {
            Hull::Interval(a, b) => {
                let s = (a - &p[0]) / &dir[0];
                let t = (b - &p[0]) / &dir[0];
                Ok(Some(if s <= t { (s, t) } else { (t, s) }))
            }
            Hull::Polygon(vs) => Ok(geom::clip_line(vs, p, dir)),
            Hull::Ball(..) => Err(IfsError::UnsupportedOpenSet),
        }
    }
}

/// A word with its map `u_ω = u_{ω₁}∘…∘u_{ωₙ}` and hull `u_ω(cl W)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    pub word: Vec<usize>,
    pub map: Similarity,
    pub hull: Hull,
}

impl Cylinder {
    pub fn ratio(&self) -> &BigRational {
        self.map.ratio()
    }
}

/// A finite IFS of contracting similarities with an open set.
///
/// Construction checks dimensions, ratios and the common field. The open
/// set condition itself is checked separately by [`check_osc`], so that
/// violating systems can still be built and inspected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IfSystem {
    labels: Vec<String>,
    maps: Vec<Similarity>,
    open: OpenSet,
    field: Option<u64>,
}

impl IfSystem {
    /// Letters are labelled `1, 2, …`.
    pub fn new(maps: Vec<Similarity>, open: OpenSet) -> Result<Self, IfsError> {
        let labels = (1..=maps.len()).map(|i| i.to_string()).collect();
        Self::with_labels(labels, maps, open)
    }

    pub fn with_labels(labels: Vec<String>, maps: Vec<Similarity>, open: OpenSet) -> Result<Self, IfsError> {
        if maps.is_empty() {
            return Err(IfsError::EmptyAlphabet);
        }
        if labels.len() != maps.len() {
            return Err(IfsError::DimensionMismatch { expected: maps.len(), got: labels.len() });
        }
        let d = open.dim();
        if d == 0 || d > 2 {
            return Err(IfsError::UnsupportedDimension(d));
        }
        let mut field = open.field()?;
        for u in &maps {
            if u.dim() != d {
                return Err(IfsError::DimensionMismatch { expected: d, got: u.dim() });
            }
            if !u.ratio().is_positive() || *u.ratio() >= BigRational::one() {
                return Err(IfsError::BadRatio);
            }
            field = field_of(field_of(field, u.orthogonal().iter().flatten())?, u.translation())?;
        }
        Ok(IfSystem { labels, maps, open, field })
    }

    pub fn dim(&self) -> usize {
        self.open.dim()
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn open_set(&self) -> &OpenSet {
        &self.open
    }

    /// The radicand shared by all coefficients, if any is irrational.
    pub fn field(&self) -> Option<u64> {
        self.field
    }

    /// `γ = min_a ‖u_a'‖`.
    pub fn gamma(&self) -> BigRational {
        self.maps.iter().map(|u| u.ratio().clone()).min().expect("nonempty alphabet")
    }

    pub fn root(&self) -> Cylinder {
        let map = Similarity::identity(self.dim()).expect("dimension checked");
        Cylinder { word: Vec::new(), hull: self.open.closure(), map }
    }

    pub fn child(&self, c: &Cylinder, a: usize) -> Cylinder {
        let map = c.map.compose(&self.maps[a]);
        let mut word = c.word.clone();
        word.push(a);
        Cylinder { hull: Hull::image(&self.open, &map), word, map }
    }

    pub fn cylinder(&self, word: &[usize]) -> Cylinder {
        word.iter().fold(self.root(), |c, &a| self.child(&c, a))
    }

    pub fn children(&self, c: &Cylinder) -> impl Iterator<Item = Cylinder> + '_ {
        let c = c.clone();
        (0..self.len()).map(move |a| self.child(&c, a))
    }

    /// The word in letter labels; the empty word is `ε`.
    pub fn word_label(&self, word: &[usize]) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        let sep = if self.labels.iter().all(|l| l.chars().count() == 1) { "" } else { "." };
        word.iter().map(|&a| self.labels[a].as_str()).collect::<Vec<_>>().join(sep)
    }

    /// Checks that a point lives in the system's dimension and field.
    pub fn check_point(&self, p: &[QuadScalar]) -> Result<(), IfsError> {
        if p.len() != self.dim() {
            return Err(IfsError::DimensionMismatch { expected: self.dim(), got: p.len() });
        }
        field_of(self.field, p).map(|_| ())
    }

    pub(crate) fn in_closed_w(&self, p: &[QuadScalar]) -> bool {
        match &self.open {
            OpenSet::Interval { lo, hi } => *lo <= p[0] && p[0] <= *hi,
            OpenSet::Polygon(vs) => geom::in_closed_polygon(vs, p),
            OpenSet::Ball { center, radius } => geom::dist2(center, p) <= q(&(radius * radius)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn word_strategy(n: usize, len: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::vec(0..n, 0..=len)
    }

    #[test]
    fn koch_maps_hit_their_vertices() {
        let k = koch();
        let z0 = koch_z0();
        let one = vec![QuadScalar::from_int(1), zero()];
        assert_eq!(k.maps()[1].apply(&one), z0);
        assert_eq!(k.maps()[2].apply(&[zero(), zero()]), z0);
        assert_eq!(k.maps()[2].apply(&one), vec![q(&rat(2, 3)), zero()]);
        assert_eq!(k.field(), Some(3));
    }

    #[test]
    fn inverse_round_trip() {
        let k = koch();
        let p = vec![q(&rat(2, 7)), QuadScalar::sqrt(3).unwrap().mul_rational(&rat(1, 11))];
        for u in k.maps() {
            assert_eq!(u.apply_inverse(&u.apply(&p)), p);
        }
    }

    #[test]
    fn construction_errors() {
        let t = vec![zero()];
        assert_eq!(Similarity::homothety(rat(0, 1), t.clone()), Err(IfsError::BadRatio));
        let bad = vec![vec![q(&rat(1, 2))]];
        assert_eq!(Similarity::new(rat(1, 2), bad, t.clone()), Err(IfsError::NotOrthogonal));
        let w = OpenSet::interval(zero(), QuadScalar::from_int(1)).unwrap();
        let expand = Similarity::homothety(rat(3, 2), t).unwrap();
        assert_eq!(IfSystem::new(vec![expand], w.clone()), Err(IfsError::BadRatio));
        assert_eq!(IfSystem::new(vec![], w), Err(IfsError::EmptyAlphabet));
        let s2 = QuadScalar::sqrt(2).unwrap();
        let s3 = QuadScalar::sqrt(3).unwrap();
        assert_eq!(OpenSet::interval(s2, s3 + QuadScalar::from_int(1)), Err(IfsError::FieldMismatch(2, 3)));
        let nonconvex = vec![
            vec![zero(), zero()],
            vec![QuadScalar::from_int(2), zero()],
            vec![QuadScalar::from_int(1), QuadScalar::from_int(1)],
            vec![QuadScalar::from_int(2), QuadScalar::from_int(2)],
            vec![zero(), QuadScalar::from_int(2)],
        ];
        assert_eq!(OpenSet::polygon(nonconvex), Err(IfsError::BadOpenSet));
        assert_eq!(
            OpenSet::ball(vec![zero(); 3], rat(1, 1)),
            Err(IfsError::UnsupportedDimension(3))
        );
    }

    #[test]
    fn clockwise_polygon_is_reoriented() {
        let w = OpenSet::polygon(vec![
            vec![zero(), zero()],
            vec![zero(), QuadScalar::from_int(1)],
            vec![QuadScalar::from_int(1), zero()],
        ])
        .unwrap();
        let OpenSet::Polygon(vs) = w else { panic!() };
        assert!(geom::area2(&vs).signum() > 0);
    }

    #[test]
    fn reflection_keeps_hulls_counterclockwise() {
        let w = OpenSet::polygon(vec![
            vec![zero(), zero()],
            vec![QuadScalar::from_int(1), zero()],
            vec![zero(), QuadScalar::from_int(1)],
        ])
        .unwrap();
        let u = Similarity::planar(rat(1, 2), QuadScalar::from_int(1), zero(), true, vec![zero(), q(&rat(1, 2))]).unwrap();
        assert!(!u.preserves_orientation());
        let Hull::Polygon(vs) = Hull::image(&w, &u) else { panic!() };
        assert!(geom::is_strictly_convex_ccw(&vs));
    }

    #[test]
    fn word_labels() {
        let c = cantor();
        assert_eq!(c.word_label(&[]), "ε");
        assert_eq!(c.word_label(&[0, 0]), "11");
    }

    proptest! {
        #[test]
        fn ratio_is_multiplicative(w in word_strategy(4, 6), v in word_strategy(4, 4)) {
            let k = koch();
            let a = k.cylinder(&w);
            let b = k.cylinder(&v);
            let ab = a.map.compose(&b.map);
            prop_assert_eq!(ab.ratio(), &(a.ratio() * b.ratio()));
            let mut wv = w.clone();
            wv.extend(&v);
            prop_assert_eq!(&k.cylinder(&wv).map, &ab);
            let expect = wv.iter().fold(BigRational::one(), |acc, &x| acc * k.maps()[x].ratio());
            prop_assert_eq!(ab.ratio(), &expect);
        }

        #[test]
        fn hulls_nest(w in word_strategy(4, 5), a in 0usize..4) {
            for sys in [koch(), sierpinski_right(), cantor_dust_2d()] {
                let a = a % sys.len();
                let w: Vec<usize> = w.iter().map(|x| x % sys.len()).collect();
                let c = sys.cylinder(&w);
                prop_assert!(c.hull.contains_hull(&sys.child(&c, a).hull));
            }
            let c = cantor();
            let w: Vec<usize> = w.iter().map(|x| x % 2).collect();
            let cyl = c.cylinder(&w);
            prop_assert!(cyl.hull.contains_hull(&c.child(&cyl, a % 2).hull));
        }
    }
}
