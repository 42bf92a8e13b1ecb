//! Heuristic time-step control driven by the Picard iteration count.

use thiserror::Error;

use crate::num::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum TimeControlError {
    #[error("invalid time control setting: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeControlConfig<T> {
    pub n_min_iter: usize,
    pub n_max_iter: usize,
    /// Consecutive fast steps required before `dt` grows.
    pub n_stab: usize,
    pub f_increase: T,
    pub f_decrease: T,
    pub dt_min: T,
    pub dt_max: T,
    pub dt_init: T,
}

impl<T: Scalar> Default for TimeControlConfig<T> {
    fn default() -> Self {
        TimeControlConfig {
            n_min_iter: 3,
            n_max_iter: 8,
            n_stab: 5,
            f_increase: T::of(1.3),
            f_decrease: T::of(0.7),
            dt_min: T::of(1e-4),
            dt_max: T::of(86400.0),
            dt_init: T::one(),
        }
    }
}

impl<T: Scalar> TimeControlConfig<T> {
    pub fn validate(&self) -> Result<(), TimeControlError> {
        let bad = |m: String| Err(TimeControlError::Invalid(m));
        if self.n_min_iter > self.n_max_iter {
            return bad(format!("n_min_iter {} exceeds n_max_iter {}", self.n_min_iter, self.n_max_iter));
        }
        if self.n_max_iter == 0 || self.n_stab == 0 {
            return bad("n_max_iter and n_stab must be >= 1".into());
        }
        if !(self.f_increase > T::one()) {
            return bad(format!("f_increase must exceed 1, got {}", self.f_increase));
        }
        if !(self.f_decrease > T::zero() && self.f_decrease < T::one()) {
            return bad(format!("f_decrease must lie in (0, 1), got {}", self.f_decrease));
        }
        if !(self.dt_min > T::zero() && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return bad(format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            ));
        }
        Ok(())
    }

    pub fn clamp(&self, dt: T) -> T {
        dt.max(self.dt_min).min(self.dt_max)
    }

    pub fn initial_state(&self) -> ControllerState<T> {
        ControllerState { dt: self.clamp(self.dt_init), stab_counter: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerState<T> {
    pub dt: T,
    pub stab_counter: usize,
}

/// Which rule fired in [`next_dt`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Decrease,
    Keep,
    Stabilizing,
}

pub fn classify<T>(n_iter: usize, cfg: &TimeControlConfig<T>) -> Branch {
    if n_iter > cfg.n_max_iter {
        Branch::Decrease
    } else if n_iter >= cfg.n_min_iter {
        Branch::Keep
    } else {
        Branch::Stabilizing
    }
}

pub fn next_dt<T: Scalar>(state: ControllerState<T>, n_iter: usize, cfg: &TimeControlConfig<T>) -> ControllerState<T> {
    match classify(n_iter, cfg) {
        Branch::Decrease => ControllerState { dt: cfg.clamp(cfg.f_decrease * state.dt), stab_counter: 0 },
        Branch::Keep => ControllerState { dt: state.dt, stab_counter: 0 },
        Branch::Stabilizing => {
            let counter = state.stab_counter + 1;
            if counter >= cfg.n_stab {
                ControllerState { dt: cfg.clamp(cfg.f_increase * state.dt), stab_counter: 0 }
            } else {
                ControllerState { dt: state.dt, stab_counter: counter }
            }
        }
    }
}
