//! Van Genuchten–Mualem closures and fluid property conversions.
//!
//! All quantities are SI: heads in m, `alpha` in 1/m, permeability in m²,
//! conductivity and total mobility in m/s.

use thiserror::Error;

use crate::num::{norm, scale, Scalar, Vec3};

#[derive(Debug, Error, PartialEq)]
pub enum ConstitutiveError {
    #[error("invalid Van Genuchten parameter: {0}")]
    InvalidParams(String),
    #[error("invalid fluid property: {0}")]
    InvalidFluid(String),
    #[error("saturation {theta} outside [{theta_r}, {theta_s}]")]
    SaturationOutOfRange { theta: f64, theta_r: f64, theta_s: f64 },
    #[error("effective saturation {0} outside [0, 1]")]
    EffectiveSaturationOutOfRange(f64),
}

const SLACK: f64 = 1e-12;

/// Default Mualem pore-connectivity exponent.
pub const DEFAULT_KR_EXPONENT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VanGenuchten<T: Scalar> {
    alpha: T,
    n: T,
    m: T,
    theta_r: T,
    theta_s: T,
    kr_exponent: T,
}

impl<T: Scalar> VanGenuchten<T> {
    /// `alpha` in 1/m; `m` is derived as `1 - 1/n`.
    pub fn new(alpha: T, n: T, theta_r: T, theta_s: T) -> Result<Self, ConstitutiveError> {
        let bad = |s: String| Err(ConstitutiveError::InvalidParams(s));
        if !(alpha > T::zero()) || !alpha.is_finite() {
            return bad(format!("alpha must be positive, got {alpha}"));
        }
        if !(n > T::one()) || !n.is_finite() {
            return bad(format!("n must exceed 1, got {n}"));
        }
        if !(theta_r >= T::zero() && theta_r < theta_s && theta_s <= T::one()) {
            return bad(format!("need 0 <= theta_r < theta_s <= 1, got {theta_r}, {theta_s}"));
        }
        Ok(VanGenuchten {
            alpha,
            n,
            m: T::one() - T::one() / n,
            theta_r,
            theta_s,
            kr_exponent: T::of(DEFAULT_KR_EXPONENT),
        })
    }

    pub fn with_kr_exponent(mut self, l: T) -> Self {
        self.kr_exponent = l;
        self
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn n(&self) -> T {
        self.n
    }
    pub fn m(&self) -> T {
        self.m
    }
    pub fn theta_r(&self) -> T {
        self.theta_r
    }
    pub fn theta_s(&self) -> T {
        self.theta_s
    }
    pub fn kr_exponent(&self) -> T {
        self.kr_exponent
    }

    /// `(alpha |h|)^n`, the building block of every closure.
    #[inline]
    fn suction_power(&self, h: T) -> T {
        (self.alpha * h.abs()).powf(self.n)
    }

    /// `s / (1 + s)`, finite when `s` overflows.
    fn suction_ratio(s: T) -> T {
        T::one() / (T::one() + T::one() / s)
    }

    /// Volumetric saturation at pressure head `h`.
    pub fn theta(&self, h: T) -> T {
        if h >= T::zero() {
            return self.theta_s;
        }
        let s = self.suction_power(h);
        // (θs - θr) + θr can round above θs
        ((self.theta_s - self.theta_r) * (T::one() + s).powf(-self.m) + self.theta_r).min(self.theta_s)
    }

    pub fn effective_saturation(&self, theta: T) -> Result<T, ConstitutiveError> {
        let slack = T::of(SLACK);
        if !(theta >= self.theta_r - slack && theta <= self.theta_s + slack) {
            return Err(ConstitutiveError::SaturationOutOfRange {
                theta: theta.to_f64_lossy(),
                theta_r: self.theta_r.to_f64_lossy(),
                theta_s: self.theta_s.to_f64_lossy(),
            });
        }
        let te = (theta - self.theta_r) / (self.theta_s - self.theta_r);
        Ok(te.max(T::zero()).min(T::one()))
    }

    /// Effective saturation straight from the head, without the round trip
    /// through `theta`.
    pub fn effective_saturation_of_h(&self, h: T) -> T {
        if h >= T::zero() {
            T::one()
        } else {
            (T::one() + self.suction_power(h)).powf(-self.m)
        }
    }

    /// Capillary capacity `dθ/dh` in 1/m.
    pub fn capillary_capacity(&self, h: T) -> T {
        if h >= T::zero() {
            return T::zero();
        }
        // With s = (α|h|)^n: θe^(1/m) = 1/(1+s) and 1 - θe^(1/m) = s/(1+s).
        let s = self.suction_power(h);
        let inv = T::one() / (T::one() + s);
        self.alpha * self.m * (self.theta_s - self.theta_r) / (T::one() - self.m)
            * inv
            * Self::suction_ratio(s).powf(self.m)
    }

    /// Mualem relative permeability `θe^l (1 - (1 - θe^(1/m))^m)^2`.
    pub fn relative_permeability(&self, theta_e: T) -> Result<T, ConstitutiveError> {
        let slack = T::of(SLACK);
        if !(theta_e >= -slack && theta_e <= T::one() + slack) {
            return Err(ConstitutiveError::EffectiveSaturationOutOfRange(theta_e.to_f64_lossy()));
        }
        let te = theta_e.max(T::zero()).min(T::one());
        if te == T::one() {
            return Ok(T::one());
        }
        let inner = T::one() - (T::one() - te.powf(T::one() / self.m)).powf(self.m);
        Ok(te.powf(self.kr_exponent) * inner * inner)
    }

    /// Relative permeability at head `h`.
    pub fn kr_of_h(&self, h: T) -> T {
        if h >= T::zero() {
            return T::one();
        }
        let s = self.suction_power(h);
        let te = (T::one() + s).powf(-self.m);
        // 1 - θe^(1/m) = s/(1+s), kept exact near saturation.
        let inner = T::one() - Self::suction_ratio(s).powf(self.m);
        te.powf(self.kr_exponent) * inner * inner
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidProps<T: Scalar> {
    pub rho: T,
    pub mu: T,
    pub gravity: Vec3<T>,
}

impl<T: Scalar> FluidProps<T> {
    pub fn new(rho: T, mu: T, gravity: Vec3<T>) -> Result<Self, ConstitutiveError> {
        if !(rho > T::zero()) {
            return Err(ConstitutiveError::InvalidFluid(format!("rho must be positive, got {rho}")));
        }
        if !(mu > T::zero()) {
            return Err(ConstitutiveError::InvalidFluid(format!("mu must be positive, got {mu}")));
        }
        if !(norm(gravity) > T::zero()) {
            return Err(ConstitutiveError::InvalidFluid("gravity must be non-zero".into()));
        }
        Ok(FluidProps { rho, mu, gravity })
    }

    /// Water at 1000 kg/m³ and 1 mPa·s under `g = (0, 0, -9.81)`.
    pub fn water() -> Self {
        FluidProps { rho: T::of(1e3), mu: T::of(1e-3), gravity: [T::zero(), T::zero(), T::of(-9.81)] }
    }

    pub fn g_mag(&self) -> T {
        norm(self.gravity)
    }

    /// Unit vector along gravity.
    pub fn g_hat(&self) -> Vec3<T> {
        scale(self.gravity, T::one() / self.g_mag())
    }

    /// `ρ‖g‖/μ`: converts permeability (m²) into conductivity (m/s).
    pub fn conductivity_factor(&self) -> T {
        self.rho * self.g_mag() / self.mu
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobility<T> {
    /// `K kr / μ`, m²/(Pa·s)
    pub phase: T,
    /// `phase * ρ‖g‖`, m/s
    pub total: T,
}

pub fn mobility<T: Scalar>(kr: T, permeability: T, fluid: &FluidProps<T>) -> Mobility<T> {
    let phase = permeability * kr / fluid.mu;
    Mobility { phase, total: phase * fluid.rho * fluid.g_mag() }
}

/// Intrinsic permeability (m²) from saturated conductivity (m/s).
pub fn permeability_from_conductivity<T: Scalar>(ks: T, fluid: &FluidProps<T>) -> T {
    fluid.mu * ks / (fluid.rho * fluid.g_mag())
}

/// Saturated conductivity (m/s) from intrinsic permeability (m²).
pub fn conductivity_from_permeability<T: Scalar>(k: T, fluid: &FluidProps<T>) -> T {
    k * fluid.rho * fluid.g_mag() / fluid.mu
}
