use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gwflow_core::case_io::{
    apply_overrides, extract_profile, parse_case, profile_csv, vtk_file_name, write_vtk_output, CaseConfig, RunLog,
};
use gwflow_core::driver::{DriverError, RunStats};
use gwflow_core::Simulation64;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub output: Option<PathBuf>,
    pub overrides: Vec<String>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub stats: RunStats,
    pub end_time: f64,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Set when the run stopped on the repeated minimum-step failure.
    pub aborted: Option<String>,
}

/// Reads a case file and applies `--set` overrides.
pub fn load_case(path: &Path, overrides: &[String]) -> Result<CaseConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let text = apply_overrides(&text, overrides)?;
    parse_case(&text).with_context(|| format!("in {}", path.display()))
}

pub fn run_case(path: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let cfg = load_case(path, &opts.overrides)?;
    let base = path.parent().unwrap_or(Path::new("."));
    run_config(&cfg, base, opts.output.clone())
}

pub fn run_config(cfg: &CaseConfig, base: &Path, output: Option<PathBuf>) -> Result<RunSummary> {
    let dir = output.unwrap_or_else(|| base.join(&cfg.output.dir));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut sim = Simulation64::from_case(cfg, base)?;
    log::info!(
        "{}: {} cells, end {} s, first dt {} s",
        cfg.output.name,
        sim.mesh().n_cells(),
        sim.end(),
        sim.dt()
    );
    let mut files = Vec::new();
    for _ in sim.due_outputs() {
        write_outputs(cfg, &sim, &dir, &mut files)?;
    }
    let mut table = RunLog::new();
    let mut aborted = None;
    while !sim.finished() {
        match sim.step() {
            Ok(rec) => {
                let r = &rec.report;
                let last = r.residual_history.last().copied().unwrap_or(0.0);
                table.push(rec.time, rec.dt, r.n_iter, last, r.mass_balance_error);
                if rec.output.is_some() {
                    write_outputs(cfg, &sim, &dir, &mut files)?;
                }
            }
            Err(e @ DriverError::DtMinAbort { .. }) => {
                log::error!("{e}");
                aborted = Some(e.to_string());
                break;
            }
            Err(e) => {
                table.write(&dir.join(format!("{}_log.csv", cfg.output.name)))?;
                return Err(e.into());
            }
        }
    }
    let log_path = dir.join(format!("{}_log.csv", cfg.output.name));
    table.write(&log_path)?;
    files.push(log_path);
    let stats = sim.stats().clone();
    if stats.warnings > 0 {
        log::warn!("{} step(s) accepted at the Picard iteration cap", stats.warnings);
    }
    Ok(RunSummary { stats, end_time: sim.time(), output_dir: dir, files, aborted })
}

fn write_outputs(cfg: &CaseConfig, sim: &Simulation64, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let t = sim.time();
    if cfg.output.vtk {
        let s = sim.secondary();
        files.push(write_vtk_output(sim.mesh(), sim.h(), &s.theta, &sim.problem().permeability, t, &cfg.output.name, dir)?);
    }
    if let Some(axis) = cfg.output.profile_axis {
        let stem = vtk_file_name(&cfg.output.name, t);
        let path = dir.join(format!("{}_profile.csv", stem.trim_end_matches(".vtk")));
        fs::write(&path, profile_csv(&extract_profile(sim.mesh(), sim.h(), axis)))
            .with_context(|| format!("cannot write {}", path.display()))?;
        files.push(path);
    }
    Ok(())
}
