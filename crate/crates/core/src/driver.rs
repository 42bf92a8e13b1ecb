//! Time loop: Picard steps, step-size control, output scheduling.

use std::path::Path;

use thiserror::Error;

use crate::case_io::{random_permeability, CaseConfig, CaseError, InitialSpec, MeshSpec, PermeabilitySpec};
use crate::constitutive::{ConstitutiveError, FluidProps, VanGenuchten};
use crate::fields::{BoundarySet, BoundarySpec, FieldError, SecondaryFields};
use crate::mesh::vtk::{read_vtk_legacy, read_vtk_legacy_with_patches};
use crate::mesh::{build_box_mesh, refine_uniform, synth_terrain_mesh, Mesh, MeshError, PatchRules};
use crate::num::{dot, Scalar};
use crate::richards::{picard_step, PicardConfig, Problem, RichardsError, StepReport};
use crate::timectl::{classify, next_dt, Branch, ControllerState, TimeControlConfig};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("step at t = {time} s failed: {source}")]
    Step { time: f64, source: RichardsError },
    #[error("aborting at t = {time} s: Picard needed more than {n_max} iterations twice in a row at the minimum time step {dt_min} s")]
    DtMinAbort { time: f64, dt_min: f64, n_max: usize },
    #[error("simulation already reached its end time")]
    Finished,
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Constitutive(#[from] ConstitutiveError),
    #[error(transparent)]
    Richards(#[from] RichardsError),
    #[error(transparent)]
    TimeControl(#[from] crate::timectl::TimeControlError),
}

/// One accepted step.
#[derive(Clone, Debug)]
pub struct StepRecord<T> {
    /// Time at the end of the step, s.
    pub time: f64,
    pub dt: f64,
    pub report: StepReport<T>,
    /// Index into the output times when the step landed on one.
    pub output: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    pub steps: usize,
    pub picard_iterations: usize,
    pub linear_iterations: usize,
    /// Steps accepted after hitting the Picard hard cap.
    pub warnings: usize,
    pub storage_change: f64,
    /// Time-integrated net boundary inflow, m³.
    pub inflow_volume: f64,
}

impl RunStats {
    /// Relative mismatch between total storage change and integrated inflow.
    pub fn mass_balance_error(&self) -> f64 {
        let denom = self.storage_change.abs().max(self.inflow_volume.abs()).max(f64::MIN_POSITIVE);
        (self.storage_change - self.inflow_volume).abs() / denom
    }
}

pub struct Simulation<T: Scalar> {
    problem: Problem<T>,
    h: Vec<T>,
    props: SecondaryFields<T>,
    picard: PicardConfig<T>,
    control: TimeControlConfig<f64>,
    state: ControllerState<f64>,
    fixed_dt: bool,
    time: f64,
    end: f64,
    output_times: Vec<f64>,
    next_output: usize,
    stuck_at_min: usize,
    stats: RunStats,
}

impl<T: Scalar> Simulation<T> {
    pub fn new(
        problem: Problem<T>,
        h0: Vec<T>,
        picard: PicardConfig<T>,
        control: TimeControlConfig<f64>,
        end: f64,
        output_times: Vec<f64>,
    ) -> Result<Self, DriverError> {
        if h0.len() != problem.n_cells() {
            return Err(RichardsError::SizeMismatch(h0.len(), problem.n_cells()).into());
        }
        if let Some(cell) = h0.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { name: "h".into(), cell }.into());
        }
        picard.validate()?;
        control.validate()?;
        let props = problem.secondary(&h0);
        Ok(Simulation {
            problem,
            h: h0,
            props,
            picard,
            state: control.initial_state(),
            control,
            fixed_dt: false,
            time: 0.0,
            end,
            output_times,
            next_output: 0,
            stuck_at_min: 0,
            stats: RunStats::default(),
        })
    }

    /// Keep `dt_init` for every step instead of adapting it.
    pub fn with_fixed_dt(mut self, fixed: bool) -> Self {
        self.fixed_dt = fixed;
        self
    }

    /// Builds everything a case describes; relative paths resolve against `base`.
    pub fn from_case(cfg: &CaseConfig, base: &Path) -> Result<Self, DriverError> {
        let mesh = build_mesh::<T>(&cfg.mesh, base)?;
        let fluid = FluidProps::new(T::of(cfg.fluid.rho), T::of(cfg.fluid.mu), cfg.fluid.gravity.map(T::of))?;
        let vg = VanGenuchten::new(T::of(cfg.vg.alpha), T::of(cfg.vg.n), T::of(cfg.vg.theta_r), T::of(cfg.vg.theta_s))?;
        let n = mesh.n_cells();
        let permeability = match &cfg.permeability {
            PermeabilitySpec::Uniform(k) => vec![T::of(*k); n],
            PermeabilitySpec::File(p) => read_cell_values(&base.join(p), n)?,
            PermeabilitySpec::Random { min, max, seed } => random_permeability(&mesh, *min, *max, *seed)?.values,
        };
        if let Some(cell) = permeability.iter().position(|k| !(*k >= T::zero() && k.is_finite())) {
            return Err(FieldError::NonFinite { name: "K".into(), cell }.into());
        }
        let specs: Vec<BoundarySpec<T>> = cfg
            .boundaries
            .iter()
            .map(|(patch, kind)| BoundarySpec { patch: patch.clone(), kind: kind.map(T::of) })
            .collect();
        let bcs = BoundarySet::new(&mesh, &specs)?;
        let h0 = match &cfg.initial {
            InitialSpec::Uniform(h) => vec![T::of(*h); n],
            InitialSpec::Hydrostatic(total) => {
                let g_hat = fluid.g_hat();
                mesh.cell_centroids().iter().map(|c| T::of(*total) + dot(g_hat, *c)).collect()
            }
            InitialSpec::File(p) => read_cell_values(&base.join(p), n)?,
        };
        let problem = Problem::new(mesh, vg, fluid, permeability, bcs)?.with_scheme(cfg.kr_scheme);
        let p = &cfg.picard;
        let picard = PicardConfig {
            epsilon: T::of(p.epsilon),
            n_max_iter: p.n_max_iter,
            hard_cap_factor: p.hard_cap_factor,
            relaxation: T::of(p.relaxation),
            linear_max_iter: p.linear_max_iter,
            preconditioner: p.preconditioner,
        };
        Ok(Simulation::new(problem, h0, picard, cfg.time.control.clone(), cfg.time.end, cfg.output.times.clone())?
            .with_fixed_dt(cfg.time.fixed_dt))
    }

    pub fn problem(&self) -> &Problem<T> {
        &self.problem
    }

    pub fn mesh(&self) -> &Mesh<T> {
        &self.problem.mesh
    }

    pub fn h(&self) -> &[T] {
        &self.h
    }

    pub fn secondary(&self) -> &SecondaryFields<T> {
        &self.props
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Step size the controller will propose next.
    pub fn dt(&self) -> f64 {
        self.state.dt
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn output_times(&self) -> &[f64] {
        &self.output_times
    }

    pub fn finished(&self) -> bool {
        self.time >= self.end
    }

    /// Marks outputs requested at or before the current time as done and
    /// returns their indices (the `t = 0` output, in practice).
    pub fn due_outputs(&mut self) -> Vec<usize> {
        let mut due = Vec::new();
        while self.next_output < self.output_times.len() && self.output_times[self.next_output] <= self.time {
            due.push(self.next_output);
            self.next_output += 1;
        }
        due
    }

    /// One time step, truncated to land on the next output time or the end.
    pub fn step(&mut self) -> Result<StepRecord<T>, DriverError> {
        if self.finished() {
            return Err(DriverError::Finished);
        }
        // outputs not claimed through `due_outputs` are passed over
        self.due_outputs();
        let target = self.output_times.get(self.next_output).copied().unwrap_or(self.end).min(self.end);
        let remaining = target - self.time;
        let proposed = self.state.dt;
        let (dt, truncated) = if remaining <= proposed * (1.0 + 1e-9) { (remaining, remaining < proposed) } else { (proposed, false) };
        let out = picard_step(&self.problem, &self.h, &self.props, T::of(dt), &self.picard)
            .map_err(|source| DriverError::Step { time: self.time, source })?;
        let landed = dt == remaining;
        self.time = if landed { target } else { self.time + dt };
        self.h = out.h;
        self.props = out.secondary;
        let report = out.report;

        let s = &mut self.stats;
        s.steps += 1;
        s.picard_iterations += report.n_iter;
        s.linear_iterations += report.linear_iterations;
        s.warnings += usize::from(report.warned);
        s.storage_change += report.storage_change.to_f64_lossy();
        s.inflow_volume += dt * report.boundary_inflow.to_f64_lossy();

        if !self.fixed_dt && !truncated {
            if classify(report.n_iter, &self.control) == Branch::Decrease && proposed <= self.control.dt_min {
                self.stuck_at_min += 1;
                if self.stuck_at_min >= 2 {
                    return Err(DriverError::DtMinAbort {
                        time: self.time,
                        dt_min: self.control.dt_min,
                        n_max: self.control.n_max_iter,
                    });
                }
            } else {
                self.stuck_at_min = 0;
            }
            self.state = next_dt(self.state, report.n_iter, &self.control);
        }

        let output = if landed && self.next_output < self.output_times.len() && target == self.output_times[self.next_output] {
            self.next_output += 1;
            Some(self.next_output - 1)
        } else {
            None
        };
        Ok(StepRecord { time: self.time, dt, report, output })
    }

    /// Takes up to `n` steps, stopping early at the end time.
    pub fn run_steps(&mut self, n: usize) -> Result<usize, DriverError> {
        let mut taken = 0;
        while taken < n && !self.finished() {
            self.step()?;
            taken += 1;
        }
        Ok(taken)
    }

    /// Runs to the end time.
    pub fn run(&mut self) -> Result<(), DriverError> {
        while !self.finished() {
            self.step()?;
        }
        Ok(())
    }
}

/// Builds (and refines) the mesh a case describes; relative paths resolve
/// against `base`.
pub fn build_mesh<T: Scalar>(spec: &MeshSpec, base: &Path) -> Result<Mesh<T>, DriverError> {
    let (mesh, levels) = match spec {
        MeshSpec::Box { cells, min, max, refine } => {
            (build_box_mesh(cells[0], cells[1], cells[2], [min.map(T::of), max.map(T::of)])?, *refine)
        }
        MeshSpec::Terrain { cells, extent, surface, refine } => {
            (synth_terrain_mesh(cells[0], cells[1], cells[2], *extent, surface)?, *refine)
        }
        MeshSpec::Vtk { file, patches } => {
            let text = read_text(&base.join(file))?;
            let grid = match patches {
                Some(p) => read_vtk_legacy_with_patches(&text, &PatchRules::parse(&read_text(&base.join(p))?)?)?,
                None => read_vtk_legacy(&text)?,
            };
            (grid.mesh, 0)
        }
    };
    Ok(if levels > 0 { refine_uniform(&mesh, levels)? } else { mesh })
}

fn read_text(path: &Path) -> Result<String, CaseError> {
    std::fs::read_to_string(path).map_err(|e| CaseError::Io { path: path.display().to_string(), msg: e.to_string() })
}

/// Whitespace-separated numbers, one per cell.
fn read_cell_values<T: Scalar>(path: &Path, n: usize) -> Result<Vec<T>, CaseError> {
    let io = |msg: String| CaseError::Io { path: path.display().to_string(), msg };
    let values: Vec<T> = read_text(path)?
        .split_whitespace()
        .map(|t| t.parse::<f64>().map(T::of).map_err(|_| io(format!("'{t}' is not a number"))))
        .collect::<Result<_, _>>()?;
    if values.len() != n {
        return Err(io(format!("expected {n} values (one per cell), found {}", values.len())));
    }
    Ok(values)
}
