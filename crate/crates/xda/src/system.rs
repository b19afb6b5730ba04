//! IFS definition files.
//!
//! ```json
//! {
//!   "alphabet": ["L", "R"],
//!   "maps": [
//!     { "ratio": "1/3", "translation": ["0"] },
//!     { "ratio": "1/3", "rotation": { "cos": "1", "sin": "0", "reflect": false }, "translation": ["2/3"] }
//!   ],
//!   "open_set": { "interval": ["0", "1"] }
//! }
//! ```
//!
//! Scalars use the coordinate grammar of [`crate::point`] and must be exact.
//! The open set is `{"interval": [lo, hi]}`, `{"polygon": [[x, y], …]}` or
//! `{"ball": {"center": [..], "radius": "p/q"}}`. The rotation defaults to
//! the identity; in one dimension `cos` must be `±1` and `sin` zero.

use std::path::Path;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use xda_core::ifs::{builtin, IfSystem, IfsError, OpenSet, Similarity, BUILTINS};
use xda_core::QuadScalar;

use crate::point::{parse_rational, parse_scalar, PointError};

#[derive(Debug, thiserror::Error)]
pub enum SystemError {
    #[error("unknown builtin system `{0}` (known: {known})", known = BUILTINS.join(", "))]
    UnknownBuiltin(String),
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed system file: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Scalar(#[from] PointError),
    #[error("map {0}: rotation must have cos = ±1 and sin = 0 in one dimension")]
    BadRotation(usize),
    #[error(transparent)]
    Ifs(#[from] IfsError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rotation {
    pub cos: String,
    pub sin: String,
    #[serde(default)]
    pub reflect: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub ratio: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Rotation>,
    pub translation: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OpenSetFile {
    Interval([String; 2]),
    Polygon(Vec<Vec<String>>),
    Ball { center: Vec<String>, radius: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    pub maps: Vec<MapFile>,
    #[serde(alias = "openSet")]
    pub open_set: OpenSetFile,
}

fn scalars(v: &[String]) -> Result<Vec<QuadScalar>, PointError> {
    v.iter().map(|s| parse_scalar(s)).collect()
}

fn positive_ratio(s: &str) -> Result<BigRational, SystemError> {
    let r = parse_rational(s)?;
    if r.is_positive() {
        Ok(r)
    } else {
        Err(IfsError::BadRatio.into())
    }
}

impl SystemFile {
    pub fn build(&self) -> Result<IfSystem, SystemError> {
        let open = match &self.open_set {
            OpenSetFile::Interval([lo, hi]) => OpenSet::interval(parse_scalar(lo)?, parse_scalar(hi)?)?,
            OpenSetFile::Polygon(vs) => {
                OpenSet::polygon(vs.iter().map(|v| scalars(v)).collect::<Result<Vec<_>, _>>()?)?
            }
            OpenSetFile::Ball { center, radius } => OpenSet::ball(scalars(center)?, parse_rational(radius)?)?,
        };
        let mut maps = Vec::with_capacity(self.maps.len());
        for (i, m) in self.maps.iter().enumerate() {
            let ratio = positive_ratio(&m.ratio)?;
            let t = scalars(&m.translation)?;
            let u = match (&m.rotation, t.len()) {
                (None, _) => Similarity::homothety(ratio, t)?,
                (Some(rot), 1) => {
                    let (c, s) = (parse_scalar(&rot.cos)?, parse_scalar(&rot.sin)?);
                    let one = QuadScalar::from_int(1);
                    if !s.is_zero() || (c != one && c != -&one) {
                        return Err(SystemError::BadRotation(i));
                    }
                    let sign = if rot.reflect { -c } else { c };
                    Similarity::new(ratio, vec![vec![sign]], t)?
                }
                (Some(rot), _) => {
                    Similarity::planar(ratio, parse_scalar(&rot.cos)?, parse_scalar(&rot.sin)?, rot.reflect, t)?
                }
            };
            maps.push(u);
        }
        Ok(match &self.alphabet {
            Some(labels) => IfSystem::with_labels(labels.clone(), maps, open)?,
            None => IfSystem::new(maps, open)?,
        })
    }

    /// The file form of a system with at most two dimensions.
    pub fn describe(ifs: &IfSystem) -> Self {
        let s = |x: &QuadScalar| x.to_string();
        let maps = ifs
            .maps()
            .iter()
            .map(|u| {
                let o = u.orthogonal();
                let rotation = if o.len() == 1 {
                    (o[0][0] != QuadScalar::from_int(1)).then(|| Rotation {
                        cos: s(&o[0][0]),
                        sin: "0".into(),
                        reflect: false,
                    })
                } else {
                    let identity = o[0][0] == QuadScalar::from_int(1) && o[1][0].is_zero() && o[1][1] == o[0][0];
                    (!identity).then(|| Rotation {
                        cos: s(&o[0][0]),
                        sin: s(&o[1][0]),
                        reflect: !u.preserves_orientation(),
                    })
                };
                MapFile { ratio: u.ratio().to_string(), rotation, translation: u.translation().iter().map(s).collect() }
            })
            .collect();
        let open_set = match ifs.open_set() {
            OpenSet::Interval { lo, hi } => OpenSetFile::Interval([s(lo), s(hi)]),
            OpenSet::Polygon(vs) => OpenSetFile::Polygon(vs.iter().map(|v| v.iter().map(s).collect()).collect()),
            OpenSet::Ball { center, radius } => {
                OpenSetFile::Ball { center: center.iter().map(s).collect(), radius: radius.to_string() }
            }
        };
        let default: Vec<String> = (1..=ifs.len()).map(|i| i.to_string()).collect();
        let alphabet = (ifs.labels() != default.as_slice()).then(|| ifs.labels().to_vec());
        SystemFile { alphabet, maps, open_set }
    }
}

/// `builtin:<name>` or a path to a JSON system file.
pub fn load_system(spec: &str) -> Result<IfSystem, SystemError> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin(name).ok_or_else(|| SystemError::UnknownBuiltin(name.to_string()));
    }
    let text = std::fs::read_to_string(Path::new(spec))
        .map_err(|source| SystemError::Io { path: spec.to_string(), source })?;
    let file: SystemFile = serde_json::from_str(&text)?;
    file.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use xda_core::ifs::{cantor, check_osc, koch, membership, MembershipBudget};

    #[test]
    fn builtins_round_trip_through_json() {
        for name in BUILTINS {
            let ifs = builtin(name).unwrap();
            let text = serde_json::to_string(&SystemFile::describe(&ifs)).unwrap();
            let back: SystemFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back.build().unwrap(), ifs, "{name}");
        }
    }

    #[test]
    fn hand_written_cantor() {
        let text = r#"{
            "maps": [
                {"ratio": "1/3", "translation": ["0"]},
                {"ratio": "1/3", "rotation": {"cos": "1", "sin": "0"}, "translation": ["rat:2/3"]}
            ],
            "open_set": {"interval": ["0", "1"]}
        }"#;
        let ifs = serde_json::from_str::<SystemFile>(text).unwrap().build().unwrap();
        assert_eq!(ifs, cantor());
    }

    #[test]
    fn hand_written_koch_in_sqrt3() {
        let text = r#"{
            "alphabet": ["a", "b", "c", "d"],
            "maps": [
                {"ratio": "1/3", "translation": ["0", "0"]},
                {"ratio": "1/3", "rotation": {"cos": "1/2", "sin": "quad:(0+1*sqrt(3))/2"}, "translation": ["1/3", "0"]},
                {"ratio": "1/3", "rotation": {"cos": "1/2", "sin": "(0-1*sqrt(3))/2"}, "translation": ["1/2", "quad:(0+1*sqrt(3))/6"]},
                {"ratio": "1/3", "translation": ["2/3", "0"]}
            ],
            "openSet": {"polygon": [["0","0"], ["1","0"], ["1/2","quad:(0+1*sqrt(3))/2"]]}
        }"#;
        let ifs = serde_json::from_str::<SystemFile>(text).unwrap().build().unwrap();
        assert_eq!(ifs.maps(), koch().maps());
        assert_eq!(ifs.labels(), ["a", "b", "c", "d"]);
        assert!(check_osc(&ifs).is_ok());
        let z0 = xda_core::ifs::koch_z0();
        assert!(membership(&ifs, &z0, MembershipBudget::default()).unwrap().is_in());
    }

    #[test]
    fn reflections_and_one_dimensional_flips() {
        // x ↦ 1 − x/2 and x ↦ x/2 on (0, 1)
        let text = r#"{
            "maps": [
                {"ratio": "1/2", "rotation": {"cos": "-1", "sin": "0"}, "translation": ["1"]},
                {"ratio": "1/2", "rotation": {"cos": "1", "sin": "0", "reflect": true}, "translation": ["1/2"]}
            ],
            "open_set": {"interval": ["0", "1"]}
        }"#;
        let file: SystemFile = serde_json::from_str(text).unwrap();
        let ifs = file.build().unwrap();
        let back = SystemFile::describe(&ifs).build().unwrap();
        assert_eq!(back, ifs);
        assert!(!ifs.maps()[1].preserves_orientation());
    }

    #[test]
    fn rejects_bad_files() {
        let bad_rot = r#"{"maps": [{"ratio": "1/2", "rotation": {"cos": "1/2", "sin": "0"}, "translation": ["0"]}],
                          "open_set": {"interval": ["0", "1"]}}"#;
        let f: SystemFile = serde_json::from_str(bad_rot).unwrap();
        assert!(matches!(f.build(), Err(SystemError::BadRotation(0))));
        let bad_ratio = r#"{"maps": [{"ratio": "3/2", "translation": ["0"]}], "open_set": {"interval": ["0", "1"]}}"#;
        let f: SystemFile = serde_json::from_str(bad_ratio).unwrap();
        assert!(matches!(f.build(), Err(SystemError::Ifs(IfsError::BadRatio))));
        let neg = r#"{"maps": [{"ratio": "-1/2", "translation": ["0"]}], "open_set": {"interval": ["0", "1"]}}"#;
        let f: SystemFile = serde_json::from_str(neg).unwrap();
        assert!(matches!(f.build(), Err(SystemError::Ifs(IfsError::BadRatio))));
        assert!(serde_json::from_str::<SystemFile>(r#"{"maps": [], "extra": 1}"#).is_err());
        assert!(matches!(load_system("builtin:nope"), Err(SystemError::UnknownBuiltin(_))));
        assert!(matches!(load_system("/nonexistent/x.json"), Err(SystemError::Io { .. })));
    }
}
