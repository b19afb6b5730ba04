//! Searches along lines: porosity gaps and covered segments.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;

use super::geom::{self, q};
use super::{Cylinder, GapMiss, Hull, IfSystem, IfsError, Vector};
use crate::exact::{rat, QuadScalar};

/// The line `point + s·direction`. Lengths along it are measured in the
/// parameter `s`; porosity is scale invariant, so this only rescales radii.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub point: Vector,
    pub direction: Vector,
}

impl Line {
    pub fn new(point: Vector, direction: Vector) -> Result<Self, IfsError> {
        if point.len() != direction.len() {
            return Err(IfsError::DimensionMismatch { expected: point.len(), got: direction.len() });
        }
        if direction.iter().all(QuadScalar::is_zero) {
            return Err(IfsError::ZeroDirection);
        }
        Ok(Line { point, direction })
    }

    /// The first coordinate axis of `R^d`.
    pub fn axis(d: usize) -> Self {
        let mut direction = vec![QuadScalar::zero(); d];
        direction[0] = QuadScalar::from_int(1);
        Line { point: vec![QuadScalar::zero(); d], direction }
    }

    pub fn at(&self, s: &QuadScalar) -> Vector {
        geom::add(&self.point, &geom::scale(&self.direction, s))
    }

    fn check(&self, ifs: &IfSystem) -> Result<(), IfsError> {
        ifs.check_point(&self.point)?;
        ifs.check_point(&self.direction)
    }
}

type Span = (QuadScalar, QuadScalar);

fn min_q(a: &QuadScalar, b: &QuadScalar) -> QuadScalar {
    if a <= b { a.clone() } else { b.clone() }
}

fn max_q(a: &QuadScalar, b: &QuadScalar) -> QuadScalar {
    if a >= b { a.clone() } else { b.clone() }
}

/// Sorted union of closed spans, touching spans merged.
fn merge(mut spans: Vec<Span>) -> Vec<Span> {
    spans.sort();
    let mut out: Vec<Span> = Vec::new();
    for (a, b) in spans {
        match out.last_mut() {
            Some(last) if a <= last.1 => {
                if b > last.1 {
                    last.1 = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

/// Cylinders of the next depth whose hulls meet the line within `window`.
fn expand(
    ifs: &IfSystem,
    line: &Line,
    frontier: &[Cylinder],
    window: Option<&Span>,
) -> Result<Vec<(Cylinder, Span)>, IfsError> {
    let mut out = Vec::new();
    for c in frontier {
        for child in ifs.children(c) {
            if let Some(span) = meet(&child.hull, line, window)? {
                out.push((child, span));
            }
        }
    }
    Ok(out)
}

fn meet(hull: &Hull, line: &Line, window: Option<&Span>) -> Result<Option<Span>, IfsError> {
    let Some((a, b)) = hull.clip_line(&line.point, &line.direction)? else { return Ok(None) };
    Ok(match window {
        None => Some((a, b)),
        Some((lo, hi)) => {
            let (a, b) = (max_q(&a, lo), min_q(&b, hi));
            (a <= b).then_some((a, b))
        }
    })
}

fn spans_at_depth(ifs: &IfSystem, line: &Line, depth: usize) -> Result<Vec<Span>, IfsError> {
    let root = ifs.root();
    let Some(s0) = meet(&root.hull, line, None)? else { return Ok(Vec::new()) };
    let mut level = vec![(root, s0)];
    for _ in 0..depth {
        let cyl: Vec<Cylinder> = level.into_iter().map(|(c, _)| c).collect();
        level = expand(ifs, line, &cyl, None)?;
    }
    Ok(level.into_iter().map(|(_, s)| s).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PorosityParams {
    pub epsilon: BigRational,
    pub scales: Vec<BigRational>,
    /// Centers per scale, spread over the endpoints of the line's hull
    /// spans at `center_depth`.
    pub samples: usize,
    pub center_depth: usize,
    /// Deepest level searched for a gap.
    pub max_depth: usize,
}

impl PorosityParams {
    /// Scales `3^{-1} … 3^{-k}`.
    pub fn triadic(epsilon: BigRational, k: u32) -> Self {
        let scales = (1..=k).map(|i| rat(1, 3i64.pow(i))).collect();
        PorosityParams { epsilon, scales, samples: 9, center_depth: 4, max_depth: 24 }
    }
}

/// A gap `(lo, hi)` of the depth-`depth` hull union inside `B(center, radius)`.
/// Any sub-interval of it is disjoint from `Λ ∩ L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapWitness {
    pub center: QuadScalar,
    pub radius: BigRational,
    pub gap: Span,
    pub depth: usize,
    /// `(hi − lo)/(2·radius)`, the ε this gap certifies.
    pub ratio: QuadScalar,
}

impl GapWitness {
    /// Recomputes the hull union at the recorded depth and checks that the
    /// gap avoids it and sits inside the ball.
    pub fn verify(&self, ifs: &IfSystem, line: &Line) -> Result<bool, IfsError> {
        let (lo, hi) = &self.gap;
        let inside = self.center.add_rational(&-&self.radius) <= *lo && *hi <= self.center.add_rational(&self.radius);
        let spans = spans_at_depth(ifs, line, self.depth)?;
        let clear = spans.iter().all(|(a, b)| b <= lo || a >= hi);
        let width = (hi - lo) / q(&(&self.radius * rat(2, 1)));
        Ok(inside && clear && width == self.ratio)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PorosityCertificate {
    pub epsilon: BigRational,
    pub witnesses: Vec<GapWitness>,
    /// The smallest witness ratio: `Λ ∩ L` is this porous at every tested
    /// `(x, r)`.
    pub certified: QuadScalar,
}

/// Finds, for each sampled center and scale, a gap of length `≥ 2εr` in
/// `B(x, r)` missing the hull union at some depth. The union only shrinks
/// with depth, so gaps certified at one depth stay gaps of `Λ ∩ L`.
pub fn line_porosity(ifs: &IfSystem, line: &Line, params: &PorosityParams) -> Result<PorosityCertificate, IfsError> {
    line.check(ifs)?;
    let centers = sample_centers(ifs, line, params)?;
    let mut witnesses = Vec::new();
    let mut certified: Option<QuadScalar> = None;
    let root = ifs.root();
    for r in &params.scales {
        for x in &centers {
            let window = (x.add_rational(&-r), x.add_rational(r));
            let need = q(&(r * &params.epsilon * rat(2, 1)));
            let mut frontier = match meet(&root.hull, line, Some(&window))? {
                Some(_) => vec![root.clone()],
                None => Vec::new(),
            };
            let mut found = None;
            for depth in 1..=params.max_depth {
                let level = expand(ifs, line, &frontier, Some(&window))?;
                let spans: Vec<Span> = level.iter().map(|(_, s)| s.clone()).collect();
                if let Some(gap) = widest_gap(&merge(spans), &window) {
                    if &gap.1 - &gap.0 >= need {
                        found = Some((gap, depth));
                        break;
                    }
                }
                frontier = level.into_iter().map(|(c, _)| c).collect();
            }
            let Some((gap, depth)) = found else {
                return Err(IfsError::NoGapFound(Box::new(GapMiss {
                    center: x.clone(),
                    radius: r.clone(),
                    epsilon: params.epsilon.clone(),
                    depth: params.max_depth,
                })));
            };
            let ratio = (&gap.1 - &gap.0) / q(&(r * rat(2, 1)));
            if certified.as_ref().is_none_or(|c| ratio < *c) {
                certified = Some(ratio.clone());
            }
            witnesses.push(GapWitness { center: x.clone(), radius: r.clone(), gap, depth, ratio });
        }
    }
    Ok(PorosityCertificate {
        epsilon: params.epsilon.clone(),
        witnesses,
        certified: certified.unwrap_or_else(|| QuadScalar::from_int(1)),
    })
}

fn widest_gap(merged: &[Span], window: &Span) -> Option<Span> {
    let mut cursor = window.0.clone();
    let mut best: Option<Span> = None;
    let consider = |lo: QuadScalar, hi: QuadScalar, best: &mut Option<Span>| {
        if lo < hi && best.as_ref().is_none_or(|(a, b)| &hi - &lo > b - a) {
            *best = Some((lo, hi));
        }
    };
    for (a, b) in merged {
        if *a > cursor {
            consider(cursor.clone(), a.clone(), &mut best);
        }
        if *b > cursor {
            cursor = b.clone();
        }
    }
    consider(cursor, window.1.clone(), &mut best);
    best
}

fn sample_centers(ifs: &IfSystem, line: &Line, params: &PorosityParams) -> Result<Vec<QuadScalar>, IfsError> {
    let pts: BTreeSet<QuadScalar> =
        spans_at_depth(ifs, line, params.center_depth)?.into_iter().flat_map(|(a, b)| [a, b]).collect();
    let pts: Vec<QuadScalar> = pts.into_iter().collect();
    let k = params.samples.max(1);
    if pts.len() <= k {
        return Ok(pts);
    }
    if k == 1 {
        return Ok(vec![pts[pts.len() / 2].clone()]);
    }
    let picks: BTreeSet<usize> = (0..k).map(|i| i * (pts.len() - 1) / (k - 1)).collect();
    Ok(picks.into_iter().map(|i| pts[i].clone()).collect())
}

/// A segment on `line` covered by a chain of depth-`n` hulls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveredSegment {
    pub line: Line,
    pub start: Vector,
    pub end: Vector,
    /// Squared Euclidean length.
    pub length2: QuadScalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegmentScan {
    Found(Vec<CoveredSegment>),
    /// No candidate line carries a covered segment of the requested length.
    NoneAtResolution { lines: usize, longest2: QuadScalar },
}

/// Looks for straight segments of length `≥ min_len` in the union of the
/// depth-`depth` hulls, along every line through two distinct vertices of
/// depth-2 hulls (in dimension 1, along the line itself).
pub fn segment_scan(ifs: &IfSystem, depth: usize, min_len: &BigRational) -> Result<SegmentScan, IfsError> {
    let lines = match ifs.dim() {
        1 => vec![Line::axis(1)],
        _ => anchor_lines(ifs)?,
    };
    let need = q(&(min_len * min_len));
    let mut found = Vec::new();
    let mut longest2 = QuadScalar::zero();
    for line in &lines {
        let dir2 = geom::norm2(&line.direction);
        for (a, b) in merge(spans_at_depth(ifs, line, depth)?) {
            let len2 = (&b - &a).pow(2) * &dir2;
            if len2 > longest2 {
                longest2 = len2.clone();
            }
            if len2 >= need && !len2.is_zero() {
                found.push(CoveredSegment { line: line.clone(), start: line.at(&a), end: line.at(&b), length2: len2 });
            }
        }
    }
    Ok(if found.is_empty() { SegmentScan::NoneAtResolution { lines: lines.len(), longest2 } } else { SegmentScan::Found(found) })
}

fn anchor_lines(ifs: &IfSystem) -> Result<Vec<Line>, IfsError> {
    let mut anchors: BTreeSet<Vector> = BTreeSet::new();
    for a in 0..ifs.len() {
        for b in 0..ifs.len() {
            let hull = ifs.cylinder(&[a, b]).hull;
            if matches!(hull, Hull::Ball(..)) {
                return Err(IfsError::UnsupportedOpenSet);
            }
            anchors.extend(hull.vertices());
        }
    }
    let anchors: Vec<Vector> = anchors.into_iter().collect();
    let mut keys = BTreeSet::new();
    let mut lines = Vec::new();
    for i in 0..anchors.len() {
        for j in i + 1..anchors.len() {
            let dir = geom::sub(&anchors[j], &anchors[i]);
            // normal form n·x = c with the first nonzero normal entry 1
            let (nx, ny) = (-&dir[1], dir[0].clone());
            let lead = if nx.is_zero() { ny.clone() } else { nx.clone() };
            let (nx, ny) = (&nx / &lead, &ny / &lead);
            let c = &nx * &anchors[i][0] + &ny * &anchors[i][1];
            if keys.insert((nx, ny, c)) {
                lines.push(Line { point: anchors[i].clone(), direction: dir });
            }
        }
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{cantor, koch, sierpinski_right, OpenSet, Similarity};

    fn halves() -> IfSystem {
        let maps = [0, 1].iter().map(|&t| Similarity::homothety(rat(1, 2), vec![q(&rat(t, 2))]).unwrap()).collect();
        IfSystem::new(maps, OpenSet::interval(QuadScalar::zero(), QuadScalar::from_int(1)).unwrap()).unwrap()
    }

    #[test]
    fn cantor_is_porous() {
        let c = cantor();
        let line = Line::axis(1);
        let cert = line_porosity(&c, &line, &PorosityParams::triadic(rat(1, 10), 6)).unwrap();
        assert!(cert.certified >= q(&rat(1, 10)));
        assert!(!cert.witnesses.is_empty());
        for w in &cert.witnesses {
            assert!(w.verify(&c, &line).unwrap());
        }
    }

    #[test]
    fn full_interval_is_not_porous() {
        let h = halves();
        for eps in [rat(1, 10), rat(1, 1000)] {
            let mut p = PorosityParams::triadic(eps, 3);
            p.max_depth = 12;
            assert!(matches!(line_porosity(&h, &Line::axis(1), &p), Err(IfsError::NoGapFound(_))));
        }
    }

    #[test]
    fn koch_base_is_porous() {
        let k = koch();
        let line = Line::axis(2);
        let mut p = PorosityParams::triadic(rat(1, 10), 4);
        p.samples = 5;
        let cert = line_porosity(&k, &line, &p).unwrap();
        assert!(cert.certified >= q(&rat(1, 10)));
        assert!(cert.witnesses.iter().all(|w| w.verify(&k, &line).unwrap()));
    }

    #[test]
    fn sierpinski_edges() {
        let SegmentScan::Found(segs) = segment_scan(&sierpinski_right(), 6, &rat(1, 2)).unwrap() else {
            panic!("expected segments")
        };
        let zero = QuadScalar::zero();
        let one = QuadScalar::from_int(1);
        let base = |s: &CoveredSegment| {
            let mut e = [s.start.clone(), s.end.clone()];
            e.sort();
            e == [vec![zero.clone(), zero.clone()], vec![one.clone(), zero.clone()]]
        };
        assert!(segs.iter().any(base));
        assert!(segs.iter().all(|s| s.length2 >= q(&rat(1, 4))));
    }

    #[test]
    fn cantor_has_no_segments() {
        let r = segment_scan(&cantor(), 5, &rat(1, 100)).unwrap();
        assert!(matches!(r, SegmentScan::NoneAtResolution { lines: 1, .. }));
    }

    #[test]
    fn koch_has_no_segments() {
        let r = segment_scan(&koch(), 8, &rat(1, 20)).unwrap();
        let SegmentScan::NoneAtResolution { longest2, .. } = r else { panic!("{r:?}") };
        assert!(longest2 < q(&rat(1, 400)));
    }

    #[test]
    fn merging() {
        let s = |a: i64, b: i64| (QuadScalar::from_int(a), QuadScalar::from_int(b));
        assert_eq!(merge(vec![s(3, 4), s(0, 1), s(1, 2), s(5, 6)]), vec![s(0, 2), s(3, 4), s(5, 6)]);
        assert_eq!(widest_gap(&[s(0, 2), s(3, 4)], &s(-1, 10)), Some(s(4, 10)));
    }
}
