use std::fmt::Write;

use super::units::{si_name, Dim};
use super::{Axis, CaseConfig, InitialSpec, MeshSpec, PermeabilitySpec};
use crate::fields::{BoundaryKind, KrScheme};
use crate::linsolve::Preconditioner;
use crate::mesh::Surface;

// Shortest representation that parses back to the same f64.
fn num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e7) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn q(values: &[f64], dim: Dim) -> String {
    let mut s: Vec<String> = values.iter().map(|&v| num(v)).collect();
    s.extend(si_name(dim).map(str::to_string));
    s.join(" ")
}

/// Writes `cfg` back out in SI units, every key explicit.
pub fn print_case(cfg: &CaseConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();

    kv("[mesh]\ntype", match cfg.mesh {
        MeshSpec::Box { .. } => "box".into(),
        MeshSpec::Terrain { .. } => "terrain".into(),
        MeshSpec::Vtk { .. } => "vtk".into(),
    });
    match &cfg.mesh {
        MeshSpec::Box { cells, min, max, refine } => {
            kv("cells", format!("{} {} {}", cells[0], cells[1], cells[2]));
            kv("min", q(min, Dim::Length));
            kv("max", q(max, Dim::Length));
            kv("refine", refine.to_string());
        }
        MeshSpec::Terrain { cells, extent, surface, refine } => {
            kv("cells", format!("{} {} {}", cells[0], cells[1], cells[2]));
            kv("extent", q(extent, Dim::Length));
            match *surface {
                Surface::Flat { height } => {
                    kv("surface", "flat".into());
                    kv("height", q(&[height], Dim::Length));
                }
                Surface::Sine { mean, amplitude, wavelength_x, wavelength_y } => {
                    kv("surface", "sine".into());
                    kv("mean_height", q(&[mean], Dim::Length));
                    kv("amplitude", q(&[amplitude], Dim::Length));
                    kv("wavelength", q(&[wavelength_x, wavelength_y], Dim::Length));
                }
            }
            kv("refine", refine.to_string());
        }
        MeshSpec::Vtk { file, patches } => {
            kv("file", file.display().to_string());
            if let Some(p) = patches {
                kv("patches", p.display().to_string());
            }
        }
    }

    kv("\n[fluid]\nrho", q(&[cfg.fluid.rho], Dim::Density));
    kv("mu", q(&[cfg.fluid.mu], Dim::Viscosity));
    kv("gravity", q(&cfg.fluid.gravity, Dim::Acceleration));

    kv("\n[vangenuchten]\nalpha", q(&[cfg.vg.alpha], Dim::InvLength));
    kv("n", num(cfg.vg.n));
    kv("theta_r", num(cfg.vg.theta_r));
    kv("theta_s", num(cfg.vg.theta_s));

    match &cfg.permeability {
        PermeabilitySpec::Uniform(k) => {
            kv("\n[permeability]\ntype", "uniform".into());
            kv("value", q(&[*k], Dim::Area));
        }
        PermeabilitySpec::File(p) => {
            kv("\n[permeability]\ntype", "file".into());
            kv("file", p.display().to_string());
        }
        PermeabilitySpec::Random { min, max, seed } => {
            kv("\n[permeability]\ntype", "random".into());
            kv("min", q(&[*min], Dim::Area));
            kv("max", q(&[*max], Dim::Area));
            kv("seed", seed.to_string());
        }
    }

    for (patch, kind) in &cfg.boundaries {
        let header = format!("\n[bc.{patch}]\ntype");
        match kind {
            BoundaryKind::FixedHead(h) => {
                kv(&header, "fixed_head".into());
                kv("value", q(&[*h], Dim::Length));
            }
            BoundaryKind::FixedVelocity(u) => {
                kv(&header, "fixed_velocity".into());
                kv("velocity", q(u, Dim::Velocity));
            }
            BoundaryKind::ZeroFlux => kv(&header, "zero_flux".into()),
        }
    }

    match &cfg.initial {
        InitialSpec::Uniform(h) => {
            kv("\n[initial]\ntype", "uniform".into());
            kv("head", q(&[*h], Dim::Length));
        }
        InitialSpec::Hydrostatic(h) => {
            kv("\n[initial]\ntype", "hydrostatic".into());
            kv("total_head", q(&[*h], Dim::Length));
        }
        InitialSpec::File(p) => {
            kv("\n[initial]\ntype", "file".into());
            kv("file", p.display().to_string());
        }
    }

    let t = &cfg.time.control;
    kv("\n[time]\nend", q(&[cfg.time.end], Dim::Time));
    kv("dt_init", q(&[t.dt_init], Dim::Time));
    kv("dt_min", q(&[t.dt_min], Dim::Time));
    kv("dt_max", q(&[t.dt_max], Dim::Time));
    kv("n_min_iter", t.n_min_iter.to_string());
    kv("n_stab", t.n_stab.to_string());
    kv("f_increase", num(t.f_increase));
    kv("f_decrease", num(t.f_decrease));
    kv("fixed_dt", cfg.time.fixed_dt.to_string());

    let p = &cfg.picard;
    kv("\n[picard]\nepsilon", q(&[p.epsilon], Dim::Length));
    kv("n_max_iter", p.n_max_iter.to_string());
    kv("hard_cap_factor", p.hard_cap_factor.to_string());
    kv("relaxation", num(p.relaxation));
    kv("linear_max_iter", p.linear_max_iter.to_string());
    kv("preconditioner", match p.preconditioner {
        Preconditioner::Jacobi => "jacobi".into(),
        Preconditioner::None => "none".into(),
    });
    kv("kr_scheme", match cfg.kr_scheme {
        KrScheme::Arithmetic => "arithmetic".into(),
        KrScheme::Upwind => "upwind".into(),
    });

    let o = &cfg.output;
    kv("\n[output]\nname", o.name.clone());
    kv("dir", o.dir.display().to_string());
    if !o.times.is_empty() {
        kv("times", q(&o.times, Dim::Time));
    }
    kv("vtk", o.vtk.to_string());
    if let Some(axis) = o.profile_axis {
        kv("profile_axis", match axis {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
        .into());
    }
    out
}
