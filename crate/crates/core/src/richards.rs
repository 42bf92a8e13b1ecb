//! Two-point flux finite-volume assembly of the Picard-linearized
//! pressure-head Richards' equation, and the nonlinear Picard loop.
//!
//! Per cell `c` with volume `V`, the linear system for the next iterate is
//!
//! ```text
//! V (C + C_min)/dt (h_c - h_old_c) + Σ_f T_f (h_c - h_nb) + Σ_f M_f ĝ·S_f = 0
//! ```
//!
//! with `T_f = M_f |S_f| / d_f`, `M_f` the total face mobility frozen at the
//! previous iterate and `S_f` pointing out of `c`. The gravity term is a face
//! flux so uniform total head is an exact discrete equilibrium on orthogonal
//! meshes.

use rayon::prelude::*;
use thiserror::Error;

use crate::constitutive::{FluidProps, VanGenuchten};
use crate::fields::{
    boundary_head_gradient, face_mobility, update_secondary_fields, BoundaryKind, BoundarySet,
    FieldError, KrScheme, SecondaryFields,
};
use crate::linsolve::{solve_cg, CsrMatrix, LinSolveError, Preconditioner, SparseSystem};
use crate::mesh::Mesh;
use crate::num::{dot, norm, scale, sub, Scalar, Vec3};

/// Capacity floor added to the assembled storage term (1/m).
pub const DEFAULT_C_MIN: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum RichardsError {
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("non-finite coefficient in the row of cell {cell}")]
    NonFiniteCoefficient { cell: usize },
    #[error("field size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("linear solve failed in Picard iteration {iteration}: {source}")]
    Linear { iteration: usize, source: LinSolveError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid Picard configuration: {0}")]
    BadConfig(String),
}

#[derive(Clone, Copy, Debug)]
enum Entry {
    Diag(usize),
    Off(usize),
}

/// Face geometry and matrix pattern derived once from the mesh.
#[derive(Clone, Debug)]
pub struct Discretization<T> {
    area: Vec<T>,
    normal: Vec<Vec3<T>>,
    distance: Vec<T>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    entries: Vec<Entry>,
}

impl<T: Scalar> Discretization<T> {
    pub fn new(mesh: &Mesh<T>) -> Self {
        let nf = mesh.n_faces();
        let n_int = mesh.n_interior_faces();
        let cc = mesh.cell_centroids();
        let mut area = Vec::with_capacity(nf);
        let mut normal = Vec::with_capacity(nf);
        let mut distance = Vec::with_capacity(nf);
        for f in 0..nf {
            let s = mesh.face_areas()[f];
            let a = norm(s);
            let n = scale(s, T::one() / a);
            let o = mesh.owner()[f];
            let to = if f < n_int { cc[mesh.neighbor()[f]] } else { mesh.face_centroids()[f] };
            area.push(a);
            normal.push(n);
            distance.push(dot(sub(to, cc[o]), n));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut entries = Vec::new();
        let mut row: Vec<(usize, Entry)> = Vec::new();
        for c in 0..mesh.n_cells() {
            row.clear();
            row.push((c, Entry::Diag(c)));
            for &f in mesh.cell_faces(c) {
                if f < n_int {
                    let other = if mesh.owner()[f] == c { mesh.neighbor()[f] } else { mesh.owner()[f] };
                    row.push((other, Entry::Off(f)));
                }
            }
            row.sort_by_key(|e| e.0);
            for &(col, e) in &row {
                col_idx.push(col);
                entries.push(e);
            }
            row_ptr.push(col_idx.len());
        }
        Discretization { area, normal, distance, row_ptr, col_idx, entries }
    }

    /// Projected centroid distance of face `f`.
    pub fn distance(&self, f: usize) -> T {
        self.distance[f]
    }
}

/// Everything that stays fixed over a run: geometry, material, fluid, BCs.
#[derive(Clone, Debug)]
pub struct Problem<T: Scalar> {
    pub mesh: Mesh<T>,
    pub disc: Discretization<T>,
    pub vg: VanGenuchten<T>,
    pub fluid: FluidProps<T>,
    pub permeability: Vec<T>,
    pub bcs: BoundarySet<T>,
    pub scheme: KrScheme,
    pub c_min: T,
}

impl<T: Scalar> Problem<T> {
    pub fn new(
        mesh: Mesh<T>,
        vg: VanGenuchten<T>,
        fluid: FluidProps<T>,
        permeability: Vec<T>,
        bcs: BoundarySet<T>,
    ) -> Result<Self, RichardsError> {
        if permeability.len() != mesh.n_cells() {
            return Err(RichardsError::SizeMismatch(permeability.len(), mesh.n_cells()));
        }
        let disc = Discretization::new(&mesh);
        Ok(Problem {
            mesh,
            disc,
            vg,
            fluid,
            permeability,
            bcs,
            scheme: KrScheme::Arithmetic,
            c_min: T::of(DEFAULT_C_MIN),
        })
    }

    pub fn with_scheme(mut self, scheme: KrScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn secondary(&self, h: &[T]) -> SecondaryFields<T> {
        update_secondary_fields(h, &self.permeability, &self.vg, &self.fluid)
    }

    /// Total stored water `Σ V θ` (m³).
    pub fn storage(&self, theta: &[T]) -> T {
        crate::linsolve::dot(self.mesh.cell_volumes(), theta)
    }
}

/// Linear system of one Picard iteration and the face mobilities it used.
#[derive(Clone, Debug)]
pub struct Assembled<T> {
    pub system: SparseSystem<T>,
    pub face_mobility: Vec<T>,
}

/// Assembles the Picard-linearized system around iterate `h_iter`
/// (`props` must be the closures evaluated at `h_iter`).
pub fn assemble<T: Scalar>(
    problem: &Problem<T>,
    h_iter: &[T],
    h_old: &[T],
    dt: T,
    props: &SecondaryFields<T>,
) -> Result<Assembled<T>, RichardsError> {
    if !(dt > T::zero()) {
        return Err(RichardsError::BadTimeStep(dt.to_f64_lossy()));
    }
    let n = problem.n_cells();
    for len in [h_iter.len(), h_old.len(), props.kr.len()] {
        if len != n {
            return Err(RichardsError::SizeMismatch(len, n));
        }
    }
    let mesh = &problem.mesh;
    let disc = &problem.disc;
    let fluid = &problem.fluid;
    let mf = face_mobility(
        mesh,
        &problem.bcs,
        h_iter,
        &props.kr,
        &problem.permeability,
        &problem.vg,
        fluid,
        problem.scheme,
    );
    let g_hat = fluid.g_hat();
    let n_int = mesh.n_interior_faces();

    // Face pass: transmissibility, gravity flux out of the owner, and the
    // explicit boundary flux for velocity faces.
    let face: Vec<[T; 3]> = (0..mesh.n_faces())
        .into_par_iter()
        .with_min_len(1024)
        .map(|f| {
            let s_mag = disc.area[f];
            let m = mf[f];
            let gravity = m * dot(g_hat, disc.normal[f]) * s_mag;
            let trans = m * s_mag / disc.distance[f];
            if f < n_int {
                return Ok([trans, gravity, T::zero()]);
            }
            match *problem.bcs.kind(f) {
                BoundaryKind::FixedHead(_) => Ok([trans, gravity, T::zero()]),
                kind => {
                    let u = kind.velocity().unwrap();
                    boundary_head_gradient(u, disc.normal[f], m, fluid)?;
                    Ok([T::zero(), T::zero(), dot(u, disc.normal[f]) * s_mag])
                }
            }
        })
        .collect::<Result<_, FieldError>>()?;

    let volumes = mesh.cell_volumes();
    let rows: Vec<[T; 2]> = (0..n)
        .into_par_iter()
        .with_min_len(512)
        .map(|c| {
            let storage = volumes[c] * (props.capacity[c] + problem.c_min) / dt;
            let mut diag = storage;
            let mut rhs = storage * h_old[c];
            for &f in mesh.cell_faces(c) {
                let [trans, gravity, flux] = face[f];
                let sign = if mesh.owner()[f] == c { T::one() } else { -T::one() };
                if f < n_int {
                    diag = diag + trans;
                    rhs = rhs - sign * gravity;
                } else {
                    match *problem.bcs.kind(f) {
                        BoundaryKind::FixedHead(hb) => {
                            diag = diag + trans;
                            rhs = rhs + trans * hb - gravity;
                        }
                        _ => rhs = rhs - flux,
                    }
                }
            }
            [diag, rhs]
        })
        .collect();
    if let Some(cell) = rows.iter().position(|r| !r[0].is_finite() || !r[1].is_finite()) {
        return Err(RichardsError::NonFiniteCoefficient { cell });
    }
    let values: Vec<T> = disc
        .entries
        .par_iter()
        .with_min_len(4096)
        .map(|e| match *e {
            Entry::Diag(c) => rows[c][0],
            Entry::Off(f) => -face[f][0],
        })
        .collect();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        let cell = disc.row_ptr.partition_point(|&p| p <= k) - 1;
        return Err(RichardsError::NonFiniteCoefficient { cell });
    }
    let matrix = CsrMatrix::new(n, disc.row_ptr.clone(), disc.col_idx.clone(), values);
    let rhs = rows.into_iter().map(|r| r[1]).collect();
    Ok(Assembled { system: SparseSystem { matrix, rhs }, face_mobility: mf })
}

/// Net volumetric inflow through the boundary (m³/s) for head field `h`
/// under face mobilities `mf`.
pub fn boundary_inflow<T: Scalar>(problem: &Problem<T>, h: &[T], mf: &[T]) -> T {
    let mesh = &problem.mesh;
    let disc = &problem.disc;
    let g_hat = problem.fluid.g_hat();
    let parts: Vec<T> = (mesh.n_interior_faces()..mesh.n_faces())
        .map(|f| {
            let c = mesh.owner()[f];
            let s = disc.area[f];
            let out = match *problem.bcs.kind(f) {
                BoundaryKind::FixedHead(hb) => {
                    mf[f] * s / disc.distance[f] * (h[c] - hb) + mf[f] * dot(g_hat, disc.normal[f]) * s
                }
                kind => dot(kind.velocity().unwrap(), disc.normal[f]) * s,
            };
            -out
        })
        .collect();
    parts.into_iter().fold(T::zero(), |a, b| a + b)
}

/// Relative mismatch between the storage change and the boundary inflow of a
/// step, `|ΔS - dt Q| / max(|ΔS|, |dt Q|, tiny)`.
pub fn mass_balance<T: Scalar>(storage_before: T, storage_after: T, inflow: T, dt: T) -> T {
    let ds = storage_after - storage_before;
    let q = dt * inflow;
    let denom = ds.abs().max(q.abs()).max(T::min_positive_value());
    (ds - q).abs() / denom
}

/// `max_c |a_c - b_c|`.
pub fn picard_residual<T: Scalar>(a: &[T], b: &[T]) -> Result<T, RichardsError> {
    if a.len() != b.len() {
        return Err(RichardsError::SizeMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs())))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardConfig<T> {
    /// Head-change tolerance, m.
    pub epsilon: T,
    pub n_max_iter: usize,
    /// The loop gives up (with a warning) after `hard_cap_factor * n_max_iter`.
    pub hard_cap_factor: usize,
    /// Under-relaxation of each new iterate; 1 disables it.
    pub relaxation: T,
    pub linear_max_iter: usize,
    pub preconditioner: Preconditioner,
}

impl<T: Scalar> Default for PicardConfig<T> {
    fn default() -> Self {
        PicardConfig {
            epsilon: T::of(1e-5),
            n_max_iter: 8,
            hard_cap_factor: 2,
            relaxation: T::one(),
            linear_max_iter: 10_000,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl<T: Scalar> PicardConfig<T> {
    pub fn validate(&self) -> Result<(), RichardsError> {
        if !(self.epsilon > T::zero()) {
            return Err(RichardsError::BadConfig(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.n_max_iter == 0 || self.hard_cap_factor == 0 {
            return Err(RichardsError::BadConfig("iteration limits must be >= 1".into()));
        }
        if !(self.relaxation > T::zero() && self.relaxation <= T::one()) {
            return Err(RichardsError::BadConfig(format!("relaxation must lie in (0, 1], got {}", self.relaxation)));
        }
        Ok(())
    }

    /// Inner solve tolerance slaved to the Picard tolerance.
    pub fn linear_tolerance(&self, h_scale: T) -> T {
        let t = T::of(1e-2) * self.epsilon / h_scale.max(T::one());
        t.min(T::of(1e-8))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<T> {
    pub n_iter: usize,
    /// Picard residual (m) after each iteration.
    pub residual_history: Vec<T>,
    pub converged: bool,
    /// The hard iteration cap was hit and the last iterate accepted.
    pub warned: bool,
    pub mass_balance_error: T,
    /// `Σ V θ` after minus before, m³.
    pub storage_change: T,
    /// Net boundary inflow over the step, m³/s.
    pub boundary_inflow: T,
    pub linear_iterations: usize,
}

#[derive(Clone, Debug)]
pub struct StepOutcome<T> {
    pub h: Vec<T>,
    pub secondary: SecondaryFields<T>,
    pub report: StepReport<T>,
}

/// Advances `h_old` by `dt`. `old_props` are the closures at `h_old`.
pub fn picard_step<T: Scalar>(
    problem: &Problem<T>,
    h_old: &[T],
    old_props: &SecondaryFields<T>,
    dt: T,
    cfg: &PicardConfig<T>,
) -> Result<StepOutcome<T>, RichardsError> {
    cfg.validate()?;
    let mut h = h_old.to_vec();
    let mut props = old_props.clone();
    let mut history = Vec::new();
    let mut linear_iterations = 0;
    let cap = cfg.hard_cap_factor * cfg.n_max_iter;
    let (mut converged, mut warned) = (false, false);
    let mut last_mf;
    loop {
        let iteration = history.len() + 1;
        let asm = assemble(problem, &h, h_old, dt, &props)?;
        let h_scale = h.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tol = cfg.linear_tolerance(h_scale);
        let sol = solve_cg(&asm.system, &h, tol, cfg.linear_max_iter, cfg.preconditioner)
            .map_err(|source| RichardsError::Linear { iteration, source })?;
        linear_iterations += sol.iterations;
        let mut next = sol.x;
        if cfg.relaxation != T::one() {
            for (n, &o) in next.iter_mut().zip(&h) {
                *n = o + cfg.relaxation * (*n - o);
            }
        }
        let r = picard_residual(&next, &h)?;
        h = next;
        props = problem.secondary(&h);
        last_mf = asm.face_mobility;
        history.push(r);
        if r <= cfg.epsilon {
            converged = true;
            break;
        }
        if iteration >= cap {
            warned = true;
            log::warn!(
                "Picard did not converge in {iteration} iterations (residual {r:e} m); accepting the current solution"
            );
            break;
        }
    }
    let before = problem.storage(&old_props.theta);
    let after = problem.storage(&props.theta);
    let inflow = boundary_inflow(problem, &h, &last_mf);
    let report = StepReport {
        n_iter: history.len(),
        residual_history: history,
        converged,
        warned,
        mass_balance_error: mass_balance(before, after, inflow, dt),
        storage_change: after - before,
        boundary_inflow: inflow,
        linear_iterations,
    };
    Ok(StepOutcome { h, secondary: props, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::BoundarySpec;
    use crate::mesh::build_box_mesh;

    fn column(n: usize, top: BoundaryKind<f64>, bottom: BoundaryKind<f64>) -> Problem<f64> {
        let mesh = build_box_mesh(1, 1, n, [[0.0, 0.0, -1.0], [0.01, 0.01, 0.0]]).unwrap();
        let mut specs = Vec::new();
        for p in mesh.patches() {
            let kind = match p.name.as_str() {
                "z+" => top,
                "z-" => bottom,
                _ => BoundaryKind::ZeroFlux,
            };
            specs.push(BoundarySpec { patch: p.name.clone(), kind });
        }
        let bcs = BoundarySet::new(&mesh, &specs).unwrap();
        let vg = VanGenuchten::new(3.35, 2.0, 0.102, 0.368).unwrap();
        let k = vec![9.4e-12; mesh.n_cells()];
        Problem::new(mesh, vg, FluidProps::water(), k, bcs).unwrap()
    }

    fn hydrostatic(p: &Problem<f64>, total_head: f64) -> Vec<f64> {
        p.mesh.cell_centroids().iter().map(|c| total_head - c[2]).collect()
    }

    #[test]
    fn hydrostatic_residual_is_zero() {
        let p = column(20, BoundaryKind::ZeroFlux, BoundaryKind::ZeroFlux);
        let h = hydrostatic(&p, -2.0);
        let props = p.secondary(&h);
        let asm = assemble(&p, &h, &h, 10.0, &props).unwrap();
        let ah = crate::linsolve::spmv(&asm.system.matrix, &h).unwrap();
        for (r, b) in ah.iter().zip(&asm.system.rhs) {
            assert!((r - b).abs() <= 1e-12 * b.abs().max(1e-20), "{r} vs {b}");
        }
        let out = picard_step(&p, &h, &props, 10.0, &PicardConfig::default()).unwrap();
        assert_eq!(out.report.n_iter, 1);
        assert!(out.report.converged && !out.report.warned);
        assert!(picard_residual(&out.h, &h).unwrap() < 1e-12);
    }

    #[test]
    fn one_cell_hand_assembly() {
        let mesh = build_box_mesh(1, 1, 1, [[0.0f64; 3], [1.0; 3]]).unwrap();
        let specs: Vec<_> = mesh
            .patches()
            .iter()
            .map(|p| BoundarySpec {
                patch: p.name.clone(),
                kind: match p.name.as_str() {
                    "z+" => BoundaryKind::FixedHead(-1.0),
                    "z-" => BoundaryKind::FixedHead(-2.0),
                    _ => BoundaryKind::ZeroFlux,
                },
            })
            .collect();
        let bcs = BoundarySet::new(&mesh, &specs).unwrap();
        let vg = VanGenuchten::new(3.35, 2.0, 0.102, 0.368).unwrap();
        let w = FluidProps::water();
        let k = 1e-12;
        let p = Problem::new(mesh, vg, w, vec![k], bcs).unwrap();
        let (h0, dt) = (-1.5, 100.0);
        let props = p.secondary(&[h0]);
        let asm = assemble(&p, &[h0], &[h0], dt, &props).unwrap();

        // By hand: unit cube, half-cell distance 0.5, unit face areas.
        let factor = 1e3 * 9.81 / 1e-3;
        let m_top = k * vg.kr_of_h(-1.0) * factor;
        let m_bot = k * vg.kr_of_h(-2.0) * factor;
        let storage = (vg.capillary_capacity(h0) + 1e-9) / dt;
        let diag = storage + m_top / 0.5 + m_bot / 0.5;
        // gravity flux out of the top face is -m_top, out of the bottom +m_bot
        let rhs = storage * h0 + m_top / 0.5 * -1.0 + m_bot / 0.5 * -2.0 + m_top - m_bot;
        assert!((asm.system.matrix.get(0, 0) - diag).abs() <= 1e-14 * diag);
        assert!((asm.system.rhs[0] - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn column_system_is_symmetric_tridiagonal_m_matrix() {
        let p = column(200, BoundaryKind::FixedHead(-0.75), BoundaryKind::FixedHead(-10.0));
        let h = vec![-10.0; 200];
        let props = p.secondary(&h);
        let asm = assemble(&p, &h, &h, 1.0, &props).unwrap();
        let a = &asm.system.matrix;
        assert!(a.is_symmetric());
        for i in 0..200 {
            for (j, v) in a.row(i) {
                assert!(i.abs_diff(j) <= 1);
                if i == j {
                    assert!(v > 0.0);
                } else {
                    assert!(v <= 0.0);
                }
            }
        }
    }

    #[test]
    fn picard_residual_examples() {
        assert_eq!(picard_residual(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((picard_residual(&[1.0f64, 2.1], &[1.0, 2.0]).unwrap() - 0.1).abs() < 1e-15);
        assert!((picard_residual(&[0.7f64, 1.2], &[1.0, 1.0]).unwrap() - 0.3).abs() < 1e-15);
        assert!(picard_residual(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mass_balance_examples() {
        assert_eq!(mass_balance(1.0, 1.0, 0.0, 10.0), 0.0);
        assert_eq!(mass_balance(2.0, 3.0, 0.1, 10.0), 0.0);
        assert!((mass_balance(2.0f64, 3.0, 0.05, 10.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn infiltration_step_converges() {
        let p = column(200, BoundaryKind::FixedHead(-0.75), BoundaryKind::FixedHead(-10.0));
        let h = vec![-10.0; 200];
        let props = p.secondary(&h);
        let cfg = PicardConfig::default();
        let out = picard_step(&p, &h, &props, 1e-3, &cfg).unwrap();
        assert!(out.report.converged && !out.report.warned);
        assert!(out.report.n_iter <= cfg.n_max_iter, "{:?}", out.report.residual_history);
        assert_eq!(out.report.residual_history.len(), out.report.n_iter);
        assert!(*out.report.residual_history.last().unwrap() <= 1e-5);
        assert!(out.report.boundary_inflow > 0.0);
    }

    // From the dry start a one-second step makes the unrelaxed iteration
    // cycle between two states; under-relaxation breaks the cycle.
    #[test]
    fn one_second_first_step() {
        let p = column(200, BoundaryKind::FixedHead(-0.75), BoundaryKind::FixedHead(-10.0));
        let h = vec![-10.0; 200];
        let props = p.secondary(&h);
        let plain = PicardConfig { n_max_iter: 50, ..PicardConfig::default() };
        let out = picard_step(&p, &h, &props, 1.0, &plain).unwrap();
        assert!(out.report.warned);
        let tail = &out.report.residual_history[90..];
        assert!(tail.iter().all(|&r| r > 1.0), "{tail:?}");

        let relaxed = PicardConfig { relaxation: 0.7, ..plain };
        let out = picard_step(&p, &h, &props, 1.0, &relaxed).unwrap();
        assert!(out.report.converged, "{:?}", out.report.residual_history);
    }

    #[test]
    fn huge_step_hits_the_hard_cap() {
        let p = column(200, BoundaryKind::FixedHead(-0.75), BoundaryKind::FixedHead(-10.0));
        let h = vec![-10.0; 200];
        let props = p.secondary(&h);
        let cfg = PicardConfig::default();
        let out = picard_step(&p, &h, &props, 1e6, &cfg).unwrap();
        assert!(out.report.warned && !out.report.converged);
        assert_eq!(out.report.n_iter, 2 * cfg.n_max_iter);
        assert!(out.h.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn impermeable_inflow_rejected() {
        let mut p = column(4, BoundaryKind::FixedVelocity([0.0, 0.0, -1e-6]), BoundaryKind::ZeroFlux);
        p.permeability = vec![0.0; 4];
        let h = vec![-1.0; 4];
        let props = p.secondary(&h);
        assert!(matches!(
            assemble(&p, &h, &h, 1.0, &props),
            Err(RichardsError::Field(FieldError::ImpermeableFace { .. }))
        ));
        assert!(matches!(assemble(&p, &h, &h, 0.0, &props), Err(RichardsError::BadTimeStep(_))));
    }

    #[test]
    fn non_finite_coefficient_names_cell() {
        let mut p = column(4, BoundaryKind::ZeroFlux, BoundaryKind::ZeroFlux);
        p.permeability[2] = f64::INFINITY;
        let h = vec![-1.0; 4];
        let props = p.secondary(&h);
        match assemble(&p, &h, &h, 1.0, &props) {
            Err(RichardsError::NonFiniteCoefficient { cell }) => assert!(cell == 1 || cell == 2 || cell == 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fixed_velocity_inflow_enters_storage() {
        let q = 1e-6;
        let p = column(10, BoundaryKind::FixedVelocity([0.0, 0.0, -q]), BoundaryKind::ZeroFlux);
        let h = vec![-5.0; 10];
        let props = p.secondary(&h);
        let out = picard_step(&p, &h, &props, 10.0, &PicardConfig::default()).unwrap();
        let area = 1e-4;
        assert!((out.report.boundary_inflow - q * area).abs() < 1e-18);
    }
}
