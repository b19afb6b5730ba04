//! Named systems.

use alloc::vec;
use alloc::vec::Vec;

use super::geom::{q, zero};
use super::{IfSystem, OpenSet, Similarity, Vector};
use crate::exact::{rat, QuadScalar};

pub const BUILTINS: [&str; 4] = ["cantor", "koch", "sierpinski-right", "cantor-dust-2d"];

pub fn builtin(name: &str) -> Option<IfSystem> {
    match name {
        "cantor" => Some(cantor()),
        "koch" => Some(koch()),
        "sierpinski-right" => Some(sierpinski_right()),
        "cantor-dust-2d" => Some(cantor_dust_2d()),
        _ => None,
    }
}

fn pt(x: (i64, i64), y: (i64, i64)) -> Vector {
    vec![q(&rat(x.0, x.1)), q(&rat(y.0, y.1))]
}

fn sqrt3_over(n: i64) -> QuadScalar {
    QuadScalar::sqrt(3).expect("3 is squarefree").mul_rational(&rat(1, n))
}

/// `x/3` and `x/3 + 2/3` on `(0, 1)`.
pub fn cantor() -> IfSystem {
    let maps = [0, 2]
        .iter()
        .map(|&t| Similarity::homothety(rat(1, 3), vec![q(&rat(t, 3))]).expect("valid map"))
        .collect();
    let w = OpenSet::interval(zero(), QuadScalar::from_int(1)).expect("valid interval");
    IfSystem::new(maps, w).expect("valid system")
}

/// The von Koch curve from 0 to 1 in the complex plane:
/// `z/3`, `e^{iπ/3}z/3 + 1/3`, `e^{−iπ/3}z/3 + e^{iπ/3}/3 + 1/3`, `z/3 + 2/3`,
/// with `W` the open triangle on `0, 1, e^{iπ/3}`.
pub fn koch() -> IfSystem {
    let half = q(&rat(1, 2));
    let s = sqrt3_over(2);
    let third = rat(1, 3);
    let maps = vec![
        Similarity::homothety(third.clone(), pt((0, 1), (0, 1))),
        Similarity::planar(third.clone(), half.clone(), s.clone(), false, pt((1, 3), (0, 1))),
        Similarity::planar(third.clone(), half.clone(), -s, false, koch_z0()),
        Similarity::homothety(third, pt((2, 3), (0, 1))),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .expect("valid maps");
    let w = OpenSet::polygon(vec![pt((0, 1), (0, 1)), pt((1, 1), (0, 1)), vec![half, sqrt3_over(2)]])
        .expect("valid triangle");
    IfSystem::new(maps, w).expect("valid system")
}

/// `(1/2, √3/6)`, the peak of the first-generation curve and the only point
/// of the curve on the line `Re z = 1/2`.
pub fn koch_z0() -> Vector {
    vec![q(&rat(1, 2)), sqrt3_over(6)]
}

/// `z/2`, `z/2 + 1/2`, `z/2 + i/2` on the open triangle `0, 1, i`.
pub fn sierpinski_right() -> IfSystem {
    let maps = [pt((0, 1), (0, 1)), pt((1, 2), (0, 1)), pt((0, 1), (1, 2))]
        .into_iter()
        .map(|t| Similarity::homothety(rat(1, 2), t).expect("valid map"))
        .collect();
    let w = OpenSet::polygon(vec![pt((0, 1), (0, 1)), pt((1, 1), (0, 1)), pt((0, 1), (1, 1))])
        .expect("valid triangle");
    IfSystem::new(maps, w).expect("valid system")
}

/// `x/3 + {0, 2/3}²` on the open unit square.
pub fn cantor_dust_2d() -> IfSystem {
    let maps = [(0, 0), (2, 0), (0, 2), (2, 2)]
        .into_iter()
        .map(|(a, b)| Similarity::homothety(rat(1, 3), pt((a, 3), (b, 3))).expect("valid map"))
        .collect();
    let w = OpenSet::polygon(vec![pt((0, 1), (0, 1)), pt((1, 1), (0, 1)), pt((1, 1), (1, 1)), pt((0, 1), (1, 1))])
        .expect("valid square");
    IfSystem::new(maps, w).expect("valid system")
}
