use std::fmt;
use std::path::Path;
use std::time::Instant;

use anyhow::{ensure, Result};
use gwflow_core::case_io::CaseConfig;
use gwflow_core::Simulation64;

use crate::{default_threads, with_pool};

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub threads: usize,
    /// Wall time of each repeat, s.
    pub times: Vec<f64>,
    pub median: f64,
    /// Median time at the smallest thread count over this row's median.
    pub speedup: f64,
    pub cells_per_thread: f64,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub n_cells: usize,
    pub steps: usize,
    pub rows: Vec<BenchRow>,
    /// Final heads were bit-identical across all runs.
    pub deterministic: bool,
    pub hardware_threads: usize,
}

impl BenchReport {
    pub fn speedups(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.speedup).collect()
    }

    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].speedup >= w[0].speedup)
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {} cells, {} steps, {} hardware threads", self.n_cells, self.steps, self.hardware_threads)?;
        writeln!(f, "threads,median_s,speedup,cells_per_thread,log2_threads,log2_speedup")?;
        for r in &self.rows {
            writeln!(
                f,
                "{},{:.4},{:.3},{:.0},{:.3},{:.3}",
                r.threads,
                r.median,
                r.speedup,
                r.cells_per_thread,
                (r.threads as f64).log2(),
                r.speedup.log2()
            )?;
        }
        write!(f, "# results identical across thread counts: {}", self.deterministic)
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Times `steps` controller steps of `cfg` at each thread count. Setup is
/// excluded from the timings.
pub fn bench(cfg: &CaseConfig, base: &Path, threads: &[usize], steps: usize, repeats: usize) -> Result<BenchReport> {
    ensure!(!threads.is_empty() && repeats > 0 && steps > 0, "need thread counts, repeats >= 1 and steps >= 1");
    let mut threads = threads.to_vec();
    threads.sort_unstable();
    threads.dedup();
    let hardware = default_threads();
    let mut reference: Option<Vec<f64>> = None;
    let mut deterministic = true;
    let mut rows = Vec::new();
    let mut n_cells = 0;
    for &t in &threads {
        if t > hardware {
            log::warn!("{t} threads requested but only {hardware} available");
        }
        let mut times = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let (elapsed, h, cells) = with_pool(t, || -> Result<_> {
                let mut sim = Simulation64::from_case(cfg, base)?;
                let start = Instant::now();
                sim.run_steps(steps)?;
                Ok((start.elapsed().as_secs_f64(), sim.h().to_vec(), sim.mesh().n_cells()))
            })??;
            n_cells = cells;
            match &reference {
                None => reference = Some(h),
                Some(r) => deterministic &= r.iter().zip(&h).all(|(a, b)| a.to_bits() == b.to_bits()),
            }
            times.push(elapsed);
        }
        let cells_per_thread = n_cells as f64 / t as f64;
        if cells_per_thread < 1000.0 {
            log::warn!("only {cells_per_thread:.0} cells per thread at {t} threads");
        }
        rows.push(BenchRow { threads: t, median: median(&times), times, speedup: 1.0, cells_per_thread });
    }
    let base_time = rows[0].median;
    for r in &mut rows {
        r.speedup = base_time / r.median;
    }
    Ok(BenchReport { n_cells, steps, rows, deterministic, hardware_threads: hardware })
}
