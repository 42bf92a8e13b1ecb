use std::fmt;
use std::path::Path;

use anyhow::Result;
use gwflow_core::case_io::{extract_profile, parse_case, tutorial, Axis, CaseConfig, MeshSpec, PermeabilitySpec};
use gwflow_core::constitutive::{conductivity_from_permeability, permeability_from_conductivity};
use gwflow_core::fields::BoundaryKind;
use gwflow_core::{FluidProps64, Simulation64, VanGenuchten64};
use gwflow_oracle::{Column, End, Settings, Soil};

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        (self.value - self.expected).abs() <= self.tolerance
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{verdict}  {:<44} {:>13.6e}  (expected {:.6e} ± {:.1e})", c.name, c.value, c.expected, c.tolerance)?;
        }
        write!(f, "{}", if self.passed() { "validation passed" } else { "validation FAILED" })
    }
}

/// Solver against the dense mixed-form reference on a vertical column.
#[derive(Clone, Debug)]
pub struct OracleComparison {
    pub max_diff: f64,
    pub head_range: f64,
    /// Cell heads bottom to top.
    pub solver: Vec<f64>,
    pub oracle: Vec<f64>,
}

impl OracleComparison {
    pub fn relative(&self) -> f64 {
        self.max_diff / self.head_range
    }
}

pub fn infiltration_case() -> CaseConfig {
    parse_case(tutorial("1Dinfiltration").expect("shipped case")).expect("shipped case parses")
}

fn fixed_head(cfg: &CaseConfig, patch: &str) -> f64 {
    match cfg.boundaries.iter().find(|(p, _)| p == patch) {
        Some((_, BoundaryKind::FixedHead(h))) => *h,
        other => panic!("infiltration case has no fixed head on {patch}: {other:?}"),
    }
}

/// The shipped infiltration case on a 1D column of `n_cells` cells, stepped
/// at a fixed `dt` to `t_end` with a tight Picard tolerance and no output.
pub fn infiltration_column(n_cells: usize, dt: f64, t_end: f64) -> CaseConfig {
    let mut cfg = infiltration_case();
    let MeshSpec::Box { min, max, .. } = cfg.mesh.clone() else { unreachable!() };
    cfg.mesh = MeshSpec::Box { cells: [1, 1, n_cells], min, max, refine: 0 };
    cfg.time.end = t_end;
    cfg.time.fixed_dt = true;
    cfg.time.control.dt_init = dt;
    cfg.time.control.dt_max = cfg.time.control.dt_max.max(dt);
    cfg.picard.epsilon = 1e-7;
    cfg.picard.n_max_iter = 100;
    cfg.output.times.clear();
    cfg
}

/// Cell heads sorted bottom to top.
pub fn column_heads(sim: &Simulation64) -> Vec<f64> {
    extract_profile(sim.mesh(), sim.h(), Axis::Z).into_iter().map(|p| p.1).collect()
}

/// Runs the infiltration column with `n_cells` cells at a fixed `dt` to
/// `t_end` and compares with the reference. `alpha_scale` perturbs only the
/// solver's retention curve.
pub fn compare_with_oracle(n_cells: usize, dt: f64, t_end: f64, alpha_scale: f64) -> Result<OracleComparison> {
    let reference = infiltration_case();
    let mut cfg = infiltration_column(n_cells, dt, t_end);
    cfg.vg.alpha *= alpha_scale;
    let MeshSpec::Box { min, max, .. } = cfg.mesh else { unreachable!() };
    let mut sim = Simulation64::from_case(&cfg, Path::new("."))?;
    sim.run()?;
    let solver = column_heads(&sim);

    let fluid = FluidProps64::new(reference.fluid.rho, reference.fluid.mu, reference.fluid.gravity)?;
    let PermeabilitySpec::Uniform(k) = reference.permeability else { unreachable!() };
    let soil = Soil {
        alpha: reference.vg.alpha,
        n: reference.vg.n,
        theta_r: reference.vg.theta_r,
        theta_s: reference.vg.theta_s,
        ks: conductivity_from_permeability(k, &fluid),
    };
    let (top, bottom) = (fixed_head(&reference, "z+"), fixed_head(&reference, "z-"));
    let column = Column {
        soil,
        n_cells,
        z_bottom: min[2],
        z_top: max[2],
        bottom: End::Head(bottom),
        top: End::Head(top),
    };
    let gwflow_core::case_io::InitialSpec::Uniform(h0) = reference.initial else { unreachable!() };
    let oracle = column
        .run(h0, &Settings { dt, t_end, tol: 1e-9, max_iter: 500 })
        .map_err(anyhow::Error::msg)?;
    let max_diff = solver.iter().zip(&oracle).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let heads = [top, bottom, h0];
    let head_range = heads.iter().cloned().fold(f64::MIN, f64::max) - heads.iter().cloned().fold(f64::MAX, f64::min);
    Ok(OracleComparison { max_diff, head_range, solver, oracle })
}

/// Closure golden values and the reference comparison; `alpha_scale != 1`
/// is the harness's negative control.
pub fn validate(alpha_scale: f64) -> Result<ValidationReport> {
    let cfg = infiltration_case();
    let vg = VanGenuchten64::new(cfg.vg.alpha * alpha_scale, cfg.vg.n, cfg.vg.theta_r, cfg.vg.theta_s)?;
    let water = FluidProps64::new(cfg.fluid.rho, cfg.fluid.mu, cfg.fluid.gravity)?;
    let check = |name: &str, value, expected, tolerance| Check { name: name.into(), value, expected, tolerance };
    let mut checks = vec![
        check("theta(-0.75 m)", vg.theta(-0.75), 0.20037, 5e-5),
        check("theta(-10 m)", vg.theta(-10.0), 0.10994, 5e-5),
        check("theta(-5 m)", vg.theta(-5.0), 0.118, 1e-3),
        check("K from Ks = 9.22e-5 m/s [m2]", permeability_from_conductivity(9.22e-5, &water), 9.4e-12, 1e-13),
    ];
    let cmp = compare_with_oracle(50, 1.0, 360.0, alpha_scale)?;
    checks.push(check("max |h - h_ref| / head range, 50 cells", cmp.relative(), 0.0, 0.02));
    Ok(ValidationReport { checks })
}
