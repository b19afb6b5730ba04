//! Exact planar predicates over `Q(√D)`. Polygons are convex and
//! counterclockwise.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;

use super::Vector;
use crate::exact::QuadScalar;

pub(crate) fn zero() -> QuadScalar {
    QuadScalar::zero()
}

pub(crate) fn one() -> QuadScalar {
    QuadScalar::from_int(1)
}

pub(crate) fn q(r: &BigRational) -> QuadScalar {
    QuadScalar::from_rational(r)
}

pub(crate) fn sub(a: &[QuadScalar], b: &[QuadScalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn add(a: &[QuadScalar], b: &[QuadScalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn scale(a: &[QuadScalar], s: &QuadScalar) -> Vector {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn dot(a: &[QuadScalar], b: &[QuadScalar]) -> QuadScalar {
    a.iter().zip(b).fold(zero(), |acc, (x, y)| acc + x * y)
}

pub(crate) fn norm2(a: &[QuadScalar]) -> QuadScalar {
    dot(a, a)
}

pub(crate) fn dist2(a: &[QuadScalar], b: &[QuadScalar]) -> QuadScalar {
    norm2(&sub(a, b))
}

pub(crate) fn cross(u: &[QuadScalar], v: &[QuadScalar]) -> QuadScalar {
    &u[0] * &v[1] - &u[1] * &v[0]
}

/// Positive when `p` lies left of the directed line `a → b`.
pub(crate) fn orient(a: &[QuadScalar], b: &[QuadScalar], p: &[QuadScalar]) -> QuadScalar {
    cross(&sub(b, a), &sub(p, a))
}

/// Twice the signed area.
pub(crate) fn area2(poly: &[Vector]) -> QuadScalar {
    let n = poly.len();
    (0..n).fold(zero(), |acc, i| acc + cross(&poly[i], &poly[(i + 1) % n]))
}

/// Strictly convex with positive orientation, no repeated or collinear
/// consecutive vertices.
pub(crate) fn is_strictly_convex_ccw(poly: &[Vector]) -> bool {
    let n = poly.len();
    n >= 3 && (0..n).all(|i| orient(&poly[i], &poly[(i + 1) % n], &poly[(i + 2) % n]).signum() > 0)
}

fn edges(poly: &[Vector]) -> impl Iterator<Item = (&Vector, &Vector)> {
    (0..poly.len()).map(move |i| (&poly[i], &poly[(i + 1) % poly.len()]))
}

pub(crate) fn in_closed_polygon(poly: &[Vector], p: &[QuadScalar]) -> bool {
    edges(poly).all(|(a, b)| orient(a, b, p).signum() >= 0)
}

pub(crate) fn in_open_polygon(poly: &[Vector], p: &[QuadScalar]) -> bool {
    edges(poly).all(|(a, b)| orient(a, b, p).signum() > 0)
}

/// Some edge of `p` has all of `q` weakly outside it.
fn weakly_separated_by(p: &[Vector], q: &[Vector]) -> bool {
    edges(p).any(|(a, b)| q.iter().all(|v| orient(a, b, v).signum() <= 0))
}

fn strictly_separated_by(p: &[Vector], q: &[Vector]) -> bool {
    edges(p).any(|(a, b)| q.iter().all(|v| orient(a, b, v).signum() < 0))
}

/// Interiors of two convex polygons meet.
pub(crate) fn open_polygons_overlap(p: &[Vector], q: &[Vector]) -> bool {
    !weakly_separated_by(p, q) && !weakly_separated_by(q, p)
}

/// Closed convex polygons meet.
pub(crate) fn closed_polygons_meet(p: &[Vector], q: &[Vector]) -> bool {
    !strictly_separated_by(p, q) && !strictly_separated_by(q, p)
}

/// `subject ∩ clip` for convex `clip`, by successive half-plane cuts.
pub(crate) fn clip_polygon(subject: &[Vector], clip: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = subject.to_vec();
    for (a, b) in edges(clip) {
        if out.is_empty() {
            break;
        }
        let input = core::mem::take(&mut out);
        let m = input.len();
        for i in 0..m {
            let cur = &input[i];
            let nxt = &input[(i + 1) % m];
            let sc = orient(a, b, cur);
            let sn = orient(a, b, nxt);
            if sc.signum() >= 0 {
                out.push(cur.clone());
            }
            if (sc.signum() > 0 && sn.signum() < 0) || (sc.signum() < 0 && sn.signum() > 0) {
                let t = &sc / &(&sc - &sn);
                out.push(add(cur, &scale(&sub(nxt, cur), &t)));
            }
        }
    }
    out
}

pub(crate) fn centroid(points: &[Vector]) -> Vector {
    let n = QuadScalar::from_int(points.len() as i64);
    let dim = points[0].len();
    let mut acc = vec![zero(); dim];
    for p in points {
        acc = add(&acc, p);
    }
    acc.iter().map(|x| x / &n).collect()
}

/// Squared distance from `p` to the closed segment `[a, b]`.
pub(crate) fn segment_dist2(p: &[QuadScalar], a: &[QuadScalar], b: &[QuadScalar]) -> QuadScalar {
    let ab = sub(b, a);
    let len2 = norm2(&ab);
    if len2.is_zero() {
        return dist2(p, a);
    }
    let mut t = dot(&sub(p, a), &ab) / &len2;
    if t.signum() < 0 {
        t = zero();
    } else if t > one() {
        t = one();
    }
    dist2(p, &add(a, &scale(&ab, &t)))
}

/// Closed polygon meets the closed ball of squared radius `r2`.
pub(crate) fn polygon_meets_ball(poly: &[Vector], center: &[QuadScalar], r2: &QuadScalar) -> bool {
    in_closed_polygon(poly, center) || edges(poly).any(|(a, b)| segment_dist2(center, a, b) <= *r2)
}

/// Parameter range `{s : p + s·dir ∈ poly}` of a line through a closed
/// convex polygon.
pub(crate) fn clip_line(poly: &[Vector], p: &[QuadScalar], dir: &[QuadScalar]) -> Option<(QuadScalar, QuadScalar)> {
    let mut lo: Option<QuadScalar> = None;
    let mut hi: Option<QuadScalar> = None;
    for (a, b) in edges(poly) {
        let e = sub(b, a);
        let num = cross(&e, &sub(p, a));
        let den = cross(&e, dir);
        match den.signum() {
            0 => {
                if num.signum() < 0 {
                    return None;
                }
            }
            s => {
                let bound = -(&num / &den);
                if s > 0 {
                    if lo.as_ref().is_none_or(|l| bound > *l) {
                        lo = Some(bound);
                    }
                } else if hi.as_ref().is_none_or(|h| bound < *h) {
                    hi = Some(bound);
                }
            }
        }
    }
    // a bounded polygon always yields both bounds when dir ≠ 0
    let (lo, hi) = (lo?, hi?);
    (lo <= hi).then_some((lo, hi))
}
