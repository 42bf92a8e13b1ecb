//! Case files, result writers and profile extraction.
//!
//! A case is a line-oriented text file of `key = value [unit]` entries
//! grouped under `[section]` headers. Everything is converted to SI while
//! parsing; the rest of the crate never sees a unit.

mod output;
mod parse;
mod print;
mod random;
mod units;

use std::path::PathBuf;

use thiserror::Error;

use crate::fields::{BoundaryKind, KrScheme};
use crate::mesh::{MeshError, Surface};
use crate::richards::PicardConfig;
use crate::timectl::TimeControlConfig;

pub use output::{
    extract_profile, profile_csv, vtk_file_name, write_vtk_output, Axis, RunLog, RUN_LOG_HEADER,
};
pub use parse::{apply_overrides, parse_case};
pub use print::print_case;
pub use random::{random_permeability, uniform_samples};
pub use units::Dim;

#[derive(Debug, Error, PartialEq)]
pub enum CaseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing sections: {}", .0.join(", "))]
    MissingSections(Vec<String>),
    #[error("line {line}: [{section}] {key}: {msg}")]
    Key { section: String, key: String, line: usize, msg: String },
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("bad override '{0}': expected section.key=value")]
    Override(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Where the mesh comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    Box { cells: [usize; 3], min: [f64; 3], max: [f64; 3], refine: usize },
    Terrain { cells: [usize; 3], extent: [f64; 2], surface: Surface, refine: usize },
    Vtk { file: PathBuf, patches: Option<PathBuf> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluidSpec {
    pub rho: f64,
    pub mu: f64,
    pub gravity: [f64; 3],
}

impl Default for FluidSpec {
    fn default() -> Self {
        FluidSpec { rho: 1000.0, mu: 1e-3, gravity: [0.0, 0.0, -9.81] }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VgSpec {
    pub alpha: f64,
    pub n: f64,
    pub theta_r: f64,
    pub theta_s: f64,
}

/// Intrinsic permeability, m².
#[derive(Clone, Debug, PartialEq)]
pub enum PermeabilitySpec {
    Uniform(f64),
    File(PathBuf),
    Random { min: f64, max: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Uniform(f64),
    /// `h + z` constant, with `z` measured against gravity.
    Hydrostatic(f64),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSpec {
    pub end: f64,
    pub control: TimeControlConfig<f64>,
    /// Ignore the controller and keep `dt_init` throughout.
    pub fixed_dt: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub name: String,
    pub dir: PathBuf,
    pub times: Vec<f64>,
    pub vtk: bool,
    pub profile_axis: Option<Axis>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseConfig {
    pub mesh: MeshSpec,
    pub fluid: FluidSpec,
    pub vg: VgSpec,
    pub permeability: PermeabilitySpec,
    /// In file order.
    pub boundaries: Vec<(String, BoundaryKind<f64>)>,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    pub picard: PicardConfig<f64>,
    pub kr_scheme: KrScheme,
    pub output: OutputSpec,
}

/// Shipped tutorial cases, as `(name, text)`.
pub const TUTORIALS: [(&str, &str); 4] = [
    ("1Dinfiltration", include_str!("../../cases/1Dinfiltration.case")),
    ("1Dinfiltration_Ufixed", include_str!("../../cases/1Dinfiltration_Ufixed.case")),
    ("realCase", include_str!("../../cases/realCase.case")),
    ("hydrostatic", include_str!("../../cases/hydrostatic.case")),
];

pub fn tutorial(name: &str) -> Option<&'static str> {
    TUTORIALS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
