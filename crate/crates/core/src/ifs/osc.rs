//! The open set condition: `u_a(W) ⊆ W` and `u_a(W) ∩ u_b(W) = ∅`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use super::geom::{self, q};
use super::{Hull, IfSystem, OpenSet, Vector};
use crate::exact::{rat, QuadScalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OscViolation {
    /// `u_map(W)` leaves `W`; the witness lies in `u_map(W) \ cl W` when one
    /// is found.
    NotContained { map: usize, witness: Option<Vector> },
    /// The witness lies in `u_a(W) ∩ u_b(W)`.
    Overlap { a: usize, b: usize, witness: Vector },
}

/// Verifies the open set condition exactly.
///
/// For a convex open `W`, `u(W) ⊆ W` exactly when `u(cl W) ⊆ cl W`, so
/// containment is a vertex test. Disjointness of open convex images is a
/// separating-axis test over their edges.
pub fn check_osc(ifs: &IfSystem) -> Result<(), OscViolation> {
    let w = ifs.open_set();
    let images: Vec<Hull> = ifs.maps().iter().map(|u| Hull::image(w, u)).collect();
    for (i, img) in images.iter().enumerate() {
        not_contained(w, img).map_or(Ok(()), |witness| Err(OscViolation::NotContained { map: i, witness }))?;
    }
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            if let Some(witness) = overlap(&images[a], &images[b]) {
                return Err(OscViolation::Overlap { a, b, witness });
            }
        }
    }
    Ok(())
}

/// `None` when contained, `Some(witness)` otherwise.
fn not_contained(w: &OpenSet, img: &Hull) -> Option<Option<Vector>> {
    match (w, img) {
        (OpenSet::Interval { lo, hi }, Hull::Interval(a, b)) => {
            if a < lo {
                let top = if b < lo { b } else { lo };
                Some(Some(vec![(a + top).mul_rational(&rat(1, 2))]))
            } else if b > hi {
                let bot = if a > hi { a } else { hi };
                Some(Some(vec![(b + bot).mul_rational(&rat(1, 2))]))
            } else {
                None
            }
        }
        (OpenSet::Polygon(ws), Hull::Polygon(vs)) => {
            let g = geom::centroid(vs);
            for v in vs {
                for i in 0..ws.len() {
                    let (e0, e1) = (&ws[i], &ws[(i + 1) % ws.len()]);
                    let fv = geom::orient(e0, e1, v);
                    if fv.signum() >= 0 {
                        continue;
                    }
                    // slide from v toward the centroid while staying outside this edge
                    let fg = geom::orient(e0, e1, &g);
                    let half = q(&rat(1, 2));
                    let t = if fg.signum() < 0 { half } else { (&fv / &(&fv - &fg)) * half };
                    return Some(Some(geom::add(v, &geom::scale(&geom::sub(&g, v), &t))));
                }
            }
            None
        }
        (OpenSet::Ball { center, radius }, Hull::Ball(c, r)) => {
            let slack = radius - r;
            let d2 = geom::dist2(center, c);
            if !slack.is_negative() && d2 <= q(&(&slack * &slack)) {
                None
            } else if d2 >= q(&(radius * radius)) {
                Some(Some(c.clone()))
            } else {
                Some(None)
            }
        }
        _ => unreachable!("hull shape follows the open set"),
    }
}

fn overlap(x: &Hull, y: &Hull) -> Option<Vector> {
    match (x, y) {
        (Hull::Interval(a1, b1), Hull::Interval(a2, b2)) => {
            let lo = if a1 > a2 { a1 } else { a2 };
            let hi = if b1 < b2 { b1 } else { b2 };
            (lo < hi).then(|| vec![(lo + hi).mul_rational(&rat(1, 2))])
        }
        (Hull::Polygon(p), Hull::Polygon(r)) => {
            if !geom::open_polygons_overlap(p, r) {
                return None;
            }
            Some(geom::centroid(&geom::clip_polygon(p, r)))
        }
        (Hull::Ball(c1, r1), Hull::Ball(c2, r2)) => {
            let sum = r1 + r2;
            if geom::dist2(c1, c2) >= q(&(&sum * &sum)) {
                return None;
            }
            // the point dividing c1c2 in ratio r1 : r2 is strictly inside both
            let t = q(&(r1 / &sum));
            Some(geom::add(c1, &geom::scale(&geom::sub(c2, c1), &t)))
        }
        _ => unreachable!("hull shape follows the open set"),
    }
}

impl OscViolation {
    /// Re-checks the witness against the system.
    pub fn verify(&self, ifs: &IfSystem) -> bool {
        let inside_image = |m: usize, p: &[QuadScalar]| {
            let pre = ifs.maps()[m].apply_inverse(p);
            in_open_w(ifs.open_set(), &pre)
        };
        match self {
            OscViolation::NotContained { map, witness: Some(p) } => {
                inside_image(*map, p) && !ifs.in_closed_w(p)
            }
            OscViolation::NotContained { map, witness: None } => {
                let img = Hull::image(ifs.open_set(), &ifs.maps()[*map]);
                !ifs.open_set().closure().contains_hull(&img)
            }
            OscViolation::Overlap { a, b, witness } => inside_image(*a, witness) && inside_image(*b, witness),
        }
    }
}

fn in_open_w(w: &OpenSet, p: &[QuadScalar]) -> bool {
    match w {
        OpenSet::Interval { lo, hi } => *lo < p[0] && p[0] < *hi,
        OpenSet::Polygon(vs) => geom::in_open_polygon(vs, p),
        OpenSet::Ball { center, radius } => geom::dist2(center, p) < q(&(radius * radius)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{cantor, cantor_dust_2d, koch, sierpinski_right, Similarity};

    fn interval_system(ts: &[(i64, i64)], r: (i64, i64)) -> IfSystem {
        let maps = ts.iter().map(|&(n, d)| Similarity::homothety(rat(r.0, r.1), vec![q(&rat(n, d))]).unwrap()).collect();
        IfSystem::new(maps, OpenSet::interval(QuadScalar::zero(), QuadScalar::from_int(1)).unwrap()).unwrap()
    }

    #[test]
    fn builtins_satisfy_osc() {
        for s in [cantor(), koch(), sierpinski_right(), cantor_dust_2d()] {
            assert_eq!(check_osc(&s), Ok(()));
        }
    }

    #[test]
    fn overlapping_halves() {
        let s = interval_system(&[(0, 1), (1, 4)], (1, 2));
        let v = check_osc(&s).unwrap_err();
        assert_eq!(v, OscViolation::Overlap { a: 0, b: 1, witness: vec![q(&rat(3, 8))] });
        assert!(v.verify(&s));
    }

    #[test]
    fn escaping_map() {
        let s = interval_system(&[(0, 1), (3, 4)], (1, 2));
        let v = check_osc(&s).unwrap_err();
        assert!(matches!(v, OscViolation::NotContained { map: 1, .. }));
        assert!(v.verify(&s));
    }

    #[test]
    fn polygon_overlap_witness() {
        // Sierpinski maps with a shift that makes two images overlap
        let z = QuadScalar::zero();
        let maps = vec![
            Similarity::homothety(rat(1, 2), vec![z.clone(), z.clone()]).unwrap(),
            Similarity::homothety(rat(1, 2), vec![q(&rat(1, 4)), z.clone()]).unwrap(),
        ];
        let w = OpenSet::polygon(vec![
            vec![z.clone(), z.clone()],
            vec![QuadScalar::from_int(1), z.clone()],
            vec![z.clone(), QuadScalar::from_int(1)],
        ])
        .unwrap();
        let s = IfSystem::new(maps, w).unwrap();
        let v = check_osc(&s).unwrap_err();
        assert!(matches!(v, OscViolation::Overlap { a: 0, b: 1, .. }));
        assert!(v.verify(&s));
    }

    #[test]
    fn polygon_escape_witness() {
        let z = QuadScalar::zero();
        let maps = vec![Similarity::homothety(rat(1, 2), vec![q(&rat(2, 3)), z.clone()]).unwrap()];
        let w = OpenSet::polygon(vec![
            vec![z.clone(), z.clone()],
            vec![QuadScalar::from_int(1), z.clone()],
            vec![z.clone(), QuadScalar::from_int(1)],
        ])
        .unwrap();
        let s = IfSystem::new(maps, w).unwrap();
        let v = check_osc(&s).unwrap_err();
        assert!(matches!(v, OscViolation::NotContained { map: 0, witness: Some(_) }));
        assert!(v.verify(&s));
    }

    #[test]
    fn balls() {
        let z = QuadScalar::zero();
        let w = OpenSet::ball(vec![z.clone(), z.clone()], rat(1, 1)).unwrap();
        let good = vec![
            Similarity::homothety(rat(1, 2), vec![q(&rat(-1, 2)), z.clone()]).unwrap(),
            Similarity::homothety(rat(1, 2), vec![q(&rat(1, 2)), z.clone()]).unwrap(),
        ];
        assert_eq!(check_osc(&IfSystem::new(good, w.clone()).unwrap()), Ok(()));
        let bad = vec![
            Similarity::homothety(rat(1, 2), vec![q(&rat(-1, 2)), z.clone()]).unwrap(),
            Similarity::homothety(rat(1, 2), vec![q(&rat(1, 4)), z.clone()]).unwrap(),
        ];
        let s = IfSystem::new(bad, w).unwrap();
        let v = check_osc(&s).unwrap_err();
        assert!(matches!(v, OscViolation::Overlap { .. }));
        assert!(v.verify(&s));
    }
}
