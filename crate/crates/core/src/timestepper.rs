//! Third-order strong-stability-preserving Runge–Kutta (Shu–Osher form).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::SpectralState;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    /// Observe every `output_every` steps (the final step is always observed).
    pub output_every: usize,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 1.0,
            output_every: 1,
        }
    }
}

impl TimeSpec {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let spec = Self {
            dt,
            t_end,
            output_every: 1,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Setup(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Setup(format!("end time must be non-negative, got {}", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(Error::Setup("output cadence must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps, `round(t_end / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

fn axpy(a: f64, x: &[Complex64], b: f64, y: &[Complex64], c: f64, z: &[Complex64]) -> Vec<Complex64> {
    x.iter()
        .zip(y)
        .zip(z)
        .map(|((x, y), z)| a * x + b * y + c * z)
        .collect()
}

fn check_finite(values: &[Complex64], time: f64, stage: usize) -> Result<()> {
    if values.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            time,
            stage,
            state: Box::new(values.to_vec()),
        })
    }
}

/// One step:
/// `u1 = u + dt L(u)`, `u2 = 3/4 u + 1/4 (u1 + dt L(u1))`, `u' = 1/3 u + 2/3 (u2 + dt L(u2))`.
pub fn ssprk3_step<F>(state: &SpectralState, rhs: &mut F, dt: f64) -> Result<SpectralState>
where
    F: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let u = &state.modes;
    let t = state.time;
    let l0 = rhs(u)?;
    check_finite(&l0, t, 1)?;
    let u1 = axpy(1.0, u, dt, &l0, 0.0, u);
    let l1 = rhs(&u1)?;
    check_finite(&l1, t, 2)?;
    let u2 = axpy(0.75, u, 0.25, &u1, 0.25 * dt, &l1);
    let l2 = rhs(&u2)?;
    check_finite(&l2, t, 3)?;
    let next = axpy(1.0 / 3.0, u, 2.0 / 3.0, &u2, 2.0 / 3.0 * dt, &l2);
    check_finite(&next, t + dt, 3)?;
    Ok(SpectralState::new(next, t + dt))
}

/// Integrates to `spec.t_end`, calling `observe` on the initial state and at the output cadence.
pub fn integrate<F, O>(
    mut state: SpectralState,
    rhs: &mut F,
    spec: &TimeSpec,
    mut observe: O,
) -> Result<SpectralState>
where
    F: FnMut(&[Complex64]) -> Result<Vec<Complex64>>,
    O: FnMut(usize, &SpectralState) -> Result<()>,
{
    spec.validate()?;
    let steps = spec.steps();
    let start = state.time;
    observe(0, &state)?;
    for step in 1..=steps {
        let mut next = ssprk3_step(&state, rhs, spec.dt)?;
        // avoid drift from repeated addition
        next.time = start + step as f64 * spec.dt;
        state = next;
        if step % spec.output_every == 0 || step == steps {
            observe(step, &state)?;
        }
    }
    Ok(state)
}
