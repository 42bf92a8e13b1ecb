use std::cell::Cell;
use std::path::PathBuf;

use super::units::{lookup, to_si, Dim};
use super::{
    Axis, CaseConfig, CaseError, FluidSpec, InitialSpec, MeshSpec, OutputSpec, PermeabilitySpec,
    TimeSpec, VgSpec,
};
use crate::constitutive::{permeability_from_conductivity, FluidProps, VanGenuchten};
use crate::fields::{BoundaryKind, KrScheme};
use crate::linsolve::Preconditioner;
use crate::mesh::{Surface, BOX_PATCHES, TERRAIN_PATCHES};
use crate::richards::PicardConfig;
use crate::timectl::TimeControlConfig;

const SECTIONS: [&str; 8] =
    ["mesh", "fluid", "vangenuchten", "permeability", "initial", "time", "picard", "output"];
const MANDATORY: [&str; 5] = ["mesh", "vangenuchten", "permeability", "initial", "time"];


struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn lex(text: &str) -> Result<Vec<Section>, CaseError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap().trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| CaseError::Syntax { line, msg: format!("malformed section header '{content}'") })?;
            let known = SECTIONS.contains(&name) || name.strip_prefix("bc.").is_some_and(|p| !p.is_empty());
            if !known {
                return Err(CaseError::Syntax { line, msg: format!("unknown section [{name}]") });
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(CaseError::Syntax { line, msg: format!("duplicate section [{name}]") });
            }
            sections.push(Section { name: name.to_string(), line, entries: Vec::new() });
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CaseError::Syntax { line, msg: format!("expected 'key = value', got '{content}'") });
        };
        let (key, value) = (key.trim(), value.trim());
        let section = sections
            .last_mut()
            .ok_or_else(|| CaseError::Syntax { line, msg: format!("'{key}' appears before any section") })?;
        if key.is_empty() || value.is_empty() {
            return Err(CaseError::Syntax { line, msg: "empty key or value".into() });
        }
        if section.entries.iter().any(|e| e.key == key) {
            return Err(CaseError::Key {
                section: section.name.clone(),
                key: key.into(),
                line,
                msg: "duplicate key".into(),
            });
        }
        section.entries.push(Entry { key: key.into(), value: value.into(), line });
    }
    Ok(sections)
}

struct Reader<'a> {
    sec: &'a Section,
    used: Vec<Cell<bool>>,
}

impl<'a> Reader<'a> {
    fn new(sec: &'a Section) -> Self {
        Reader { sec, used: sec.entries.iter().map(|_| Cell::new(false)).collect() }
    }

    fn err(&self, key: &str, line: usize, msg: impl Into<String>) -> CaseError {
        CaseError::Key { section: self.sec.name.clone(), key: key.into(), line, msg: msg.into() }
    }

    fn missing(&self, key: &str) -> CaseError {
        self.err(key, self.sec.line, "missing mandatory key")
    }

    fn raw(&self, key: &str) -> Option<&'a Entry> {
        let i = self.sec.entries.iter().position(|e| e.key == key)?;
        self.used[i].set(true);
        Some(&self.sec.entries[i])
    }

    fn numbers(&self, key: &str, dim: Dim) -> Result<Option<Vec<f64>>, CaseError> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        let mut tokens: Vec<&str> = e.value.split_whitespace().collect();
        let unit = match tokens.last() {
            Some(t) if t.parse::<f64>().is_err() && lookup(t).is_some() => tokens.pop(),
            _ => None,
        };
        if tokens.is_empty() {
            return Err(self.err(key, e.line, "no numeric value"));
        }
        tokens
            .iter()
            .map(|t| {
                let v: f64 = t.parse().map_err(|_| self.err(key, e.line, format!("'{t}' is not a number or known unit")))?;
                if !v.is_finite() {
                    return Err(self.err(key, e.line, "value must be finite"));
                }
                to_si(v, unit, dim).map_err(|m| self.err(key, e.line, m))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn fixed<const N: usize>(&self, key: &str, dim: Dim) -> Result<Option<[f64; N]>, CaseError> {
        let Some(v) = self.numbers(key, dim)? else { return Ok(None) };
        let line = self.raw(key).unwrap().line;
        v.try_into()
            .map(Some)
            .map_err(|v: Vec<f64>| self.err(key, line, format!("expected {N} values, got {}", v.len())))
    }

    fn f64(&self, key: &str, dim: Dim) -> Result<Option<f64>, CaseError> {
        Ok(self.fixed::<1>(key, dim)?.map(|[v]| v))
    }

    fn req_f64(&self, key: &str, dim: Dim) -> Result<f64, CaseError> {
        self.f64(key, dim)?.ok_or_else(|| self.missing(key))
    }

    fn req_fixed<const N: usize>(&self, key: &str, dim: Dim) -> Result<[f64; N], CaseError> {
        self.fixed::<N>(key, dim)?.ok_or_else(|| self.missing(key))
    }

    fn string(&self, key: &str) -> Option<String> {
        self.raw(key).map(|e| e.value.clone())
    }

    fn req_string(&self, key: &str) -> Result<String, CaseError> {
        self.string(key).ok_or_else(|| self.missing(key))
    }

    fn integers<const N: usize>(&self, key: &str) -> Result<Option<[u64; N]>, CaseError> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        let v: Vec<u64> = e
            .value
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| self.err(key, e.line, format!("'{t}' is not a non-negative integer"))))
            .collect::<Result<_, _>>()?;
        let n = v.len();
        v.try_into().map(Some).map_err(|_| self.err(key, e.line, format!("expected {N} integers, got {n}")))
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, CaseError> {
        Ok(self.integers::<1>(key)?.map(|[v]| v as usize))
    }

    fn choice<'c>(&self, key: &str, options: &[&'c str]) -> Result<Option<&'c str>, CaseError> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        options
            .iter()
            .find(|o| **o == e.value)
            .copied()
            .map(Some)
            .ok_or_else(|| self.err(key, e.line, format!("expected one of {}, got '{}'", options.join("|"), e.value)))
    }

    fn req_choice<'c>(&self, key: &str, options: &[&'c str]) -> Result<&'c str, CaseError> {
        self.choice(key, options)?.ok_or_else(|| self.missing(key))
    }

    fn bool(&self, key: &str) -> Result<Option<bool>, CaseError> {
        Ok(self.choice(key, &["true", "false"])?.map(|v| v == "true"))
    }

    fn line_of(&self, key: &str) -> usize {
        self.sec.entries.iter().find(|e| e.key == key).map_or(self.sec.line, |e| e.line)
    }

    fn finish(self) -> Result<(), CaseError> {
        match self.sec.entries.iter().zip(&self.used).find(|(_, u)| !u.get()) {
            Some((e, _)) => Err(self.err(&e.key, e.line, "unknown key")),
            None => Ok(()),
        }
    }
}

/// Parses and validates a case file, converting every value to SI.
pub fn parse_case(text: &str) -> Result<CaseConfig, CaseError> {
    let sections = lex(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name == name);
    let mut missing: Vec<String> =
        MANDATORY.iter().filter(|m| find(m).is_none()).map(|m| m.to_string()).collect();
    if !sections.iter().any(|s| s.name.starts_with("bc.")) {
        missing.push("bc.<patch>".into());
    }
    if !missing.is_empty() {
        return Err(CaseError::MissingSections(missing));
    }

    let fluid = match find("fluid") {
        Some(s) => parse_fluid(Reader::new(s))?,
        None => FluidSpec::default(),
    };
    let mesh_sec = find("mesh").unwrap();
    let mesh = parse_mesh(Reader::new(mesh_sec))?;
    let vg = parse_vg(Reader::new(find("vangenuchten").unwrap()))?;
    let permeability = parse_permeability(Reader::new(find("permeability").unwrap()), &fluid)?;
    let initial = parse_initial(Reader::new(find("initial").unwrap()))?;
    let (picard, kr_scheme) = match find("picard") {
        Some(s) => parse_picard(Reader::new(s))?,
        None => (PicardConfig::default(), KrScheme::default()),
    };
    let time = parse_time(Reader::new(find("time").unwrap()), picard.n_max_iter)?;
    let output = match find("output") {
        Some(s) => parse_output(Reader::new(s), time.end)?,
        None => OutputSpec { name: "case".into(), dir: ".".into(), times: vec![], vtk: true, profile_axis: None },
    };

    let mut boundaries = Vec::new();
    for s in sections.iter().filter(|s| s.name.starts_with("bc.")) {
        let patch = s.name["bc.".len()..].to_string();
        boundaries.push((patch, parse_bc(Reader::new(s))?));
    }
    let known: Option<&[&str]> = match mesh {
        MeshSpec::Box { .. } => Some(&BOX_PATCHES),
        MeshSpec::Terrain { .. } => Some(&TERRAIN_PATCHES),
        MeshSpec::Vtk { .. } => None,
    };
    if let Some(known) = known {
        for (patch, _) in &boundaries {
            if !known.contains(&patch.as_str()) {
                let line = sections.iter().find(|s| s.name == format!("bc.{patch}")).unwrap().line;
                return Err(CaseError::Key {
                    section: format!("bc.{patch}"),
                    key: "patch".into(),
                    line,
                    msg: format!("mesh has no patch '{patch}' (patches: {})", known.join(", ")),
                });
            }
        }
        if let Some(p) = known.iter().find(|p| !boundaries.iter().any(|(b, _)| b == *p)) {
            return Err(CaseError::Key {
                section: "mesh".into(),
                key: "type".into(),
                line: mesh_sec.line,
                msg: format!("patch '{p}' has no [bc.{p}] section"),
            });
        }
    }

    Ok(CaseConfig { mesh, fluid, vg, permeability, boundaries, initial, time, picard, kr_scheme, output })
}

fn parse_fluid(r: Reader) -> Result<FluidSpec, CaseError> {
    let d = FluidSpec::default();
    let spec = FluidSpec {
        rho: r.f64("rho", Dim::Density)?.unwrap_or(d.rho),
        mu: r.f64("mu", Dim::Viscosity)?.unwrap_or(d.mu),
        gravity: r.fixed::<3>("gravity", Dim::Acceleration)?.unwrap_or(d.gravity),
    };
    FluidProps::new(spec.rho, spec.mu, spec.gravity).map_err(|e| r.err("rho", r.sec.line, e.to_string()))?;
    r.finish()?;
    Ok(spec)
}

fn cells(r: &Reader) -> Result<[usize; 3], CaseError> {
    let c = r.integers::<3>("cells")?.ok_or_else(|| r.missing("cells"))?;
    if c.contains(&0) {
        return Err(r.err("cells", r.line_of("cells"), "cell counts must be >= 1"));
    }
    Ok(c.map(|v| v as usize))
}

fn parse_mesh(r: Reader) -> Result<MeshSpec, CaseError> {
    let spec = match r.req_choice("type", &["box", "terrain", "vtk"])? {
        "box" => {
            let cells = cells(&r)?;
            let min = r.req_fixed::<3>("min", Dim::Length)?;
            let max = r.req_fixed::<3>("max", Dim::Length)?;
            if (0..3).any(|k| !(max[k] > min[k])) {
                return Err(r.err("max", r.line_of("max"), "max must exceed min on every axis"));
            }
            MeshSpec::Box { cells, min, max, refine: r.usize("refine")?.unwrap_or(0) }
        }
        "terrain" => {
            let cells = cells(&r)?;
            let extent = r.req_fixed::<2>("extent", Dim::Length)?;
            if extent.iter().any(|&e| !(e > 0.0)) {
                return Err(r.err("extent", r.line_of("extent"), "extents must be positive"));
            }
            let surface = match r.req_choice("surface", &["flat", "sine"])? {
                "flat" => Surface::Flat { height: r.req_f64("height", Dim::Length)? },
                _ => {
                    let [wavelength_x, wavelength_y] = r.req_fixed::<2>("wavelength", Dim::Length)?;
                    Surface::Sine {
                        mean: r.req_f64("mean_height", Dim::Length)?,
                        amplitude: r.req_f64("amplitude", Dim::Length)?,
                        wavelength_x,
                        wavelength_y,
                    }
                }
            };
            MeshSpec::Terrain { cells, extent, surface, refine: r.usize("refine")?.unwrap_or(0) }
        }
        _ => MeshSpec::Vtk {
            file: PathBuf::from(r.req_string("file")?),
            patches: r.string("patches").map(PathBuf::from),
        },
    };
    r.finish()?;
    Ok(spec)
}

fn parse_vg(r: Reader) -> Result<VgSpec, CaseError> {
    let spec = VgSpec {
        alpha: r.req_f64("alpha", Dim::InvLength)?,
        n: r.req_f64("n", Dim::None)?,
        theta_r: r.req_f64("theta_r", Dim::None)?,
        theta_s: r.req_f64("theta_s", Dim::None)?,
    };
    VanGenuchten::new(spec.alpha, spec.n, spec.theta_r, spec.theta_s)
        .map_err(|e| r.err("alpha", r.line_of("alpha"), e.to_string()))?;
    r.finish()?;
    Ok(spec)
}

fn parse_permeability(r: Reader, fluid: &FluidSpec) -> Result<PermeabilitySpec, CaseError> {
    let spec = match r.req_choice("type", &["uniform", "file", "random"])? {
        "uniform" => {
            let value = match (r.f64("value", Dim::Area)?, r.f64("conductivity", Dim::Velocity)?) {
                (Some(k), None) => k,
                (None, Some(ks)) => {
                    let f = FluidProps::new(fluid.rho, fluid.mu, fluid.gravity).unwrap();
                    permeability_from_conductivity(ks, &f)
                }
                (Some(_), Some(_)) => {
                    return Err(r.err("conductivity", r.line_of("conductivity"), "give either value or conductivity"))
                }
                (None, None) => return Err(r.missing("value")),
            };
            if !(value > 0.0) {
                return Err(r.err("value", r.line_of("value"), "permeability must be positive"));
            }
            PermeabilitySpec::Uniform(value)
        }
        "file" => PermeabilitySpec::File(PathBuf::from(r.req_string("file")?)),
        _ => {
            let min = r.req_f64("min", Dim::Area)?;
            let max = r.req_f64("max", Dim::Area)?;
            if !(min > 0.0 && min <= max) {
                return Err(r.err("max", r.line_of("max"), "need 0 < min <= max"));
            }
            let [seed] = r.integers::<1>("seed")?.ok_or_else(|| r.err("seed", r.sec.line, "random permeability requires an explicit seed"))?;
            PermeabilitySpec::Random { min, max, seed }
        }
    };
    r.finish()?;
    Ok(spec)
}

fn parse_bc(r: Reader) -> Result<BoundaryKind<f64>, CaseError> {
    let kind = match r.req_choice("type", &["fixed_head", "fixed_velocity", "zero_flux"])? {
        "fixed_head" => BoundaryKind::FixedHead(r.req_f64("value", Dim::Length)?),
        "fixed_velocity" => BoundaryKind::FixedVelocity(r.req_fixed::<3>("velocity", Dim::Velocity)?),
        _ => BoundaryKind::ZeroFlux,
    };
    r.finish()?;
    Ok(kind)
}

fn parse_initial(r: Reader) -> Result<InitialSpec, CaseError> {
    let spec = match r.req_choice("type", &["uniform", "hydrostatic", "file"])? {
        "uniform" => InitialSpec::Uniform(r.req_f64("head", Dim::Length)?),
        "hydrostatic" => InitialSpec::Hydrostatic(r.req_f64("total_head", Dim::Length)?),
        _ => InitialSpec::File(PathBuf::from(r.req_string("file")?)),
    };
    r.finish()?;
    Ok(spec)
}

fn parse_time(r: Reader, n_max_iter: usize) -> Result<TimeSpec, CaseError> {
    let d = TimeControlConfig::<f64>::default();
    let end = r.req_f64("end", Dim::Time)?;
    if !(end > 0.0) {
        return Err(r.err("end", r.line_of("end"), "end time must be positive"));
    }
    let control = TimeControlConfig {
        n_min_iter: r.usize("n_min_iter")?.unwrap_or(d.n_min_iter),
        n_max_iter,
        n_stab: r.usize("n_stab")?.unwrap_or(d.n_stab),
        f_increase: r.f64("f_increase", Dim::None)?.unwrap_or(d.f_increase),
        f_decrease: r.f64("f_decrease", Dim::None)?.unwrap_or(d.f_decrease),
        dt_min: r.f64("dt_min", Dim::Time)?.unwrap_or(d.dt_min),
        dt_max: r.f64("dt_max", Dim::Time)?.unwrap_or(d.dt_max),
        dt_init: r.f64("dt_init", Dim::Time)?.unwrap_or(d.dt_init),
    };
    control.validate().map_err(|e| r.err("dt_init", r.line_of("dt_init"), e.to_string()))?;
    let fixed_dt = r.bool("fixed_dt")?.unwrap_or(false);
    r.finish()?;
    Ok(TimeSpec { end, control, fixed_dt })
}

fn parse_picard(r: Reader) -> Result<(PicardConfig<f64>, KrScheme), CaseError> {
    let d = PicardConfig::<f64>::default();
    let cfg = PicardConfig {
        epsilon: r.f64("epsilon", Dim::Length)?.unwrap_or(d.epsilon),
        n_max_iter: r.usize("n_max_iter")?.unwrap_or(d.n_max_iter),
        hard_cap_factor: r.usize("hard_cap_factor")?.unwrap_or(d.hard_cap_factor),
        relaxation: r.f64("relaxation", Dim::None)?.unwrap_or(d.relaxation),
        linear_max_iter: r.usize("linear_max_iter")?.unwrap_or(d.linear_max_iter),
        preconditioner: match r.choice("preconditioner", &["jacobi", "none"])? {
            Some("none") => Preconditioner::None,
            _ => Preconditioner::Jacobi,
        },
    };
    cfg.validate().map_err(|e| r.err("epsilon", r.line_of("epsilon"), e.to_string()))?;
    let scheme = match r.choice("kr_scheme", &["arithmetic", "upwind"])? {
        Some("upwind") => KrScheme::Upwind,
        _ => KrScheme::Arithmetic,
    };
    r.finish()?;
    Ok((cfg, scheme))
}

fn parse_output(r: Reader, end: f64) -> Result<OutputSpec, CaseError> {
    let times = r.numbers("times", Dim::Time)?.unwrap_or_default();
    let line = r.line_of("times");
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(r.err("times", line, "output times must be strictly increasing"));
    }
    if times.iter().any(|&t| t < 0.0 || t > end) {
        return Err(r.err("times", line, format!("output times must lie in [0, {end}] s")));
    }
    let profile_axis = r.choice("profile_axis", &["x", "y", "z"])?.map(|a| match a {
        "x" => Axis::X,
        "y" => Axis::Y,
        _ => Axis::Z,
    });
    let spec = OutputSpec {
        name: r.string("name").unwrap_or_else(|| "case".into()),
        dir: PathBuf::from(r.string("dir").unwrap_or_else(|| ".".into())),
        times,
        vtk: r.bool("vtk")?.unwrap_or(true),
        profile_axis,
    };
    if spec.name.contains(['/', '\\']) || spec.name.split_whitespace().count() != 1 {
        return Err(r.err("name", r.line_of("name"), "name must be a single word without path separators"));
    }
    r.finish()?;
    Ok(spec)
}

/// Applies `section.key=value` overrides to case text, replacing existing
/// entries or appending new ones.
pub fn apply_overrides(text: &str, overrides: &[String]) -> Result<String, CaseError> {
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    for o in overrides {
        let (path, value) = o.split_once('=').ok_or_else(|| CaseError::Override(o.clone()))?;
        let (section, key) = path.trim().rsplit_once('.').ok_or_else(|| CaseError::Override(o.clone()))?;
        let (key, value) = (key.trim(), value.trim());
        if section.is_empty() || key.is_empty() || value.is_empty() {
            return Err(CaseError::Override(o.clone()));
        }
        let header = |l: &str| {
            let c = l.split('#').next().unwrap().trim();
            c.strip_prefix('[').and_then(|c| c.strip_suffix(']')).map(|n| n.trim().to_string())
        };
        let entry = format!("{key} = {value}");
        let Some(start) = lines.iter().position(|l| header(l).as_deref() == Some(section)) else {
            lines.push(format!("[{section}]"));
            lines.push(entry);
            continue;
        };
        let end = (start + 1..lines.len()).find(|&i| header(&lines[i]).is_some()).unwrap_or(lines.len());
        let existing = (start + 1..end).find(|&i| {
            let c = lines[i].split('#').next().unwrap();
            c.split_once('=').is_some_and(|(k, _)| k.trim() == key)
        });
        match existing {
            Some(i) => lines[i] = entry,
            None => {
                let last = (start..end).rev().find(|&i| !lines[i].trim().is_empty()).unwrap();
                lines.insert(last + 1, entry);
            }
        }
    }
    Ok(lines.join("\n") + "\n")
}
