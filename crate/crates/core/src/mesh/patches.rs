//! Boundary patch rules, as read from a patch sidecar file.
//!
//! One rule per line:
//!
//! ```text
//! bottom plane axis=z value=-1.0 tol=1e-9
//! top remaining
//! ```
//!
//! Rules are tried in order and the first match wins. Faces matched by no
//! rule land in the `boundary` patch.

use super::MeshError;
use crate::num::{Scalar, Vec3};

pub const DEFAULT_PATCH: &str = "boundary";

#[derive(Clone, Debug, PartialEq)]
pub enum Selector {
    Plane { axis: usize, value: f64, tol: f64 },
    Remaining,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchRule {
    pub patch: String,
    pub selector: Selector,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PatchRules {
    pub rules: Vec<PatchRule>,
}

fn axis_index(s: &str) -> Option<usize> {
    match s {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => None,
    }
}

const AXES: [char; 3] = ['x', 'y', 'z'];

impl PatchRules {
    pub fn parse(text: &str) -> Result<Self, MeshError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| MeshError::PatchRule { line: line_no, msg };
            let mut tokens = line.split_whitespace();
            let patch = tokens.next().unwrap().to_string();
            let selector = match tokens.next() {
                Some("remaining") => Selector::Remaining,
                Some("plane") => {
                    let (mut axis, mut value, mut tol) = (None, None, None);
                    for tok in tokens.by_ref() {
                        let (k, v) = tok
                            .split_once('=')
                            .ok_or_else(|| err(format!("expected key=value, got '{tok}'")))?;
                        match k {
                            "axis" => {
                                axis = Some(
                                    axis_index(v).ok_or_else(|| err(format!("bad axis '{v}'")))?,
                                )
                            }
                            "value" => {
                                value = Some(
                                    v.parse::<f64>()
                                        .map_err(|_| err(format!("bad value '{v}'")))?,
                                )
                            }
                            "tol" => {
                                tol = Some(
                                    v.parse::<f64>().map_err(|_| err(format!("bad tol '{v}'")))?,
                                )
                            }
                            _ => return Err(err(format!("unknown key '{k}'"))),
                        }
                    }
                    Selector::Plane {
                        axis: axis.ok_or_else(|| err("missing axis".into()))?,
                        value: value.ok_or_else(|| err("missing value".into()))?,
                        tol: tol.ok_or_else(|| err("missing tol".into()))?,
                    }
                }
                Some(other) => return Err(err(format!("unknown selector '{other}'"))),
                None => return Err(err("missing selector".into())),
            };
            if tokens.next().is_some() {
                return Err(err("trailing tokens".into()));
            }
            rules.push(PatchRule { patch, selector });
        }
        Ok(PatchRules { rules })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            match r.selector {
                Selector::Plane { axis, value, tol } => out.push_str(&format!(
                    "{} plane axis={} value={:?} tol={:?}\n",
                    r.patch, AXES[axis], value, tol
                )),
                Selector::Remaining => out.push_str(&format!("{} remaining\n", r.patch)),
            }
        }
        out
    }

    /// Distinct patch names in rule order, followed by the default patch.
    pub fn patch_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rules {
            if !names.contains(&r.patch) {
                names.push(r.patch.clone());
            }
        }
        if !names.iter().any(|n| n == DEFAULT_PATCH) {
            names.push(DEFAULT_PATCH.to_string());
        }
        names
    }

    /// Index into [`patch_names`](Self::patch_names) for a face centroid.
    pub fn assign<T: Scalar>(&self, names: &[String], centroid: Vec3<T>) -> usize {
        let hit = self.rules.iter().find(|r| match r.selector {
            Selector::Plane { axis, value, tol } => {
                (centroid[axis].to_f64_lossy() - value).abs() <= tol
            }
            Selector::Remaining => true,
        });
        let name = hit.map_or(DEFAULT_PATCH, |r| r.patch.as_str());
        names.iter().position(|n| n == name).unwrap()
    }
}
