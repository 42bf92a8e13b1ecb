use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::CaseError;
use crate::mesh::{vtk::write_vtk, Mesh};
use crate::num::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        self as usize
    }
}

/// `<case>_t<seconds>.vtk`, seconds printed as an integer when whole.
pub fn vtk_file_name(case: &str, time: f64) -> String {
    if time.fract() == 0.0 && time.abs() < 1e15 {
        format!("{case}_t{}.vtk", time as i64)
    } else {
        format!("{case}_t{time}.vtk")
    }
}

/// Writes cell fields `h`, `theta` and `K` to a legacy VTK file in `dir`.
pub fn write_vtk_output<T: Scalar>(
    mesh: &Mesh<T>,
    h: &[T],
    theta: &[T],
    permeability: &[T],
    time: f64,
    case: &str,
    dir: &Path,
) -> Result<PathBuf, CaseError> {
    let n = mesh.n_cells();
    if h.len() != n || theta.len() != n || permeability.len() != n {
        return Err(CaseError::Io { path: dir.display().to_string(), msg: "field size differs from the mesh".into() });
    }
    let path = dir.join(vtk_file_name(case, time));
    let title = format!("{case} t={time} s");
    let text = write_vtk(mesh, &title, &[("h", h), ("theta", theta), ("K", permeability)]);
    std::fs::write(&path, text).map_err(|e| CaseError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    Ok(path)
}

/// Cell values ordered by centroid coordinate along `axis`; cells sharing a
/// coordinate (to 1e-9 of the mesh extent) are averaged into one row.
pub fn extract_profile<T: Scalar>(mesh: &Mesh<T>, field: &[T], axis: Axis) -> Vec<(T, T)> {
    let a = axis.index();
    let mut pts: Vec<(T, T)> = mesh.cell_centroids().iter().zip(field).map(|(c, &v)| (c[a], v)).collect();
    pts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let Some((first, last)) = pts.first().zip(pts.last()) else { return Vec::new() };
    let tol = (last.0 - first.0).abs().max(T::one()) * T::of(1e-9);
    let mut out: Vec<(T, T)> = Vec::new();
    let mut i = 0;
    while i < pts.len() {
        let mut j = i + 1;
        while j < pts.len() && pts[j].0 - pts[i].0 <= tol {
            j += 1;
        }
        let n = T::of((j - i) as f64);
        let coord = pts[i..j].iter().fold(T::zero(), |s, p| s + p.0) / n;
        let value = pts[i..j].iter().fold(T::zero(), |s, p| s + p.1) / n;
        out.push((coord, value));
        i = j;
    }
    out
}

pub fn profile_csv<T: Scalar>(profile: &[(T, T)]) -> String {
    let mut s = String::from("coord_m,value\n");
    for (c, v) in profile {
        writeln!(s, "{c:e},{v:e}").unwrap();
    }
    s
}

pub const RUN_LOG_HEADER: &str = "time_s,dt_s,n_picard,residual_m,mass_balance_err";

/// Per-step run table.
#[derive(Clone, Debug, Default)]
pub struct RunLog {
    text: String,
    rows: usize,
}

impl RunLog {
    pub fn new() -> Self {
        RunLog { text: format!("{RUN_LOG_HEADER}\n"), rows: 0 }
    }

    pub fn push(&mut self, time: f64, dt: f64, n_picard: usize, residual: f64, mass_balance_err: f64) {
        writeln!(self.text, "{time:e},{dt:e},{n_picard},{residual:e},{mass_balance_err:e}").unwrap();
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_csv(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<(), CaseError> {
        std::fs::write(path, &self.text).map_err(|e| CaseError::Io { path: path.display().to_string(), msg: e.to_string() })
    }
}
