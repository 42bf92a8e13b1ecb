/// Physical dimension a case key is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    None,
    Length,
    Time,
    InvLength,
    Velocity,
    Area,
    Viscosity,
    Density,
    Acceleration,
}

const UNITS: [(&str, Dim, f64); 15] = [
    ("m", Dim::Length, 1.0),
    ("cm", Dim::Length, 0.01),
    ("mm", Dim::Length, 1e-3),
    ("s", Dim::Time, 1.0),
    ("min", Dim::Time, 60.0),
    ("h", Dim::Time, 3600.0),
    ("day", Dim::Time, 86400.0),
    ("1/m", Dim::InvLength, 1.0),
    ("1/cm", Dim::InvLength, 100.0),
    ("m/s", Dim::Velocity, 1.0),
    ("cm/s", Dim::Velocity, 0.01),
    ("m2", Dim::Area, 1.0),
    ("Pa.s", Dim::Viscosity, 1.0),
    ("kg/m3", Dim::Density, 1.0),
    ("m/s2", Dim::Acceleration, 1.0),
];

pub(crate) fn lookup(unit: &str) -> Option<(Dim, f64)> {
    UNITS.iter().find(|u| u.0 == unit).map(|u| (u.1, u.2))
}

/// SI unit printed for a dimension.
pub(crate) fn si_name(dim: Dim) -> Option<&'static str> {
    match dim {
        Dim::None => None,
        Dim::Length => Some("m"),
        Dim::Time => Some("s"),
        Dim::InvLength => Some("1/m"),
        Dim::Velocity => Some("m/s"),
        Dim::Area => Some("m2"),
        Dim::Viscosity => Some("Pa.s"),
        Dim::Density => Some("kg/m3"),
        Dim::Acceleration => Some("m/s2"),
    }
}

/// Converts `value` given in `unit` (SI when absent) to SI for `dim`.
pub(crate) fn to_si(value: f64, unit: Option<&str>, dim: Dim) -> Result<f64, String> {
    let Some(unit) = unit else { return Ok(value) };
    match lookup(unit) {
        None => Err(format!("unknown unit '{unit}'")),
        Some((d, f)) if d == dim => Ok(value * f),
        Some((d, _)) if dim == Dim::None => Err(format!("expected a plain number, got unit '{unit}' ({d:?})")),
        Some((d, _)) => Err(format!("unit '{unit}' is a {d:?}, expected {dim:?}")),
    }
}
