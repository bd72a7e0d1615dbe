//! Fixed-step classical Runge-Kutta integration.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// Hard cap on the number of RK4 steps in a single integration.
pub const MAX_STEPS: u64 = 100_000_000;

/// Number of uniform steps covering `span` with steps no larger than `dt`.
pub fn step_count(span: f64, dt: f64) -> Result<u64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::domain(format!("time step must be positive, got {dt}")));
    }
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::domain(format!(
            "integration span must be positive, got {span}"
        )));
    }
    let ratio = span / dt;
    // tolerate roundoff when span is an integer multiple of dt
    let steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    };
    if steps > MAX_STEPS as f64 {
        return Err(Error::Resource(format!(
            "{steps:e} RK4 steps requested, limit is {MAX_STEPS:e}"
        )));
    }
    Ok(steps.max(1.0) as u64)
}

pub fn rk4_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &SVector<f64, N>,
    h: f64,
) -> Result<SVector<f64, N>>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &(y + k1 * (0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(y + k2 * (0.5 * h)))?;
    let k4 = f(t + h, &(y + k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` with uniform steps of at
/// most `dt`, keeping every `stride`-th sample plus both endpoints.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: SVector<f64, N>,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<(Vec<f64>, Vec<SVector<f64, N>>)>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
{
    let steps = step_count(t_end - t0, dt)?;
    let stride = stride.max(1) as u64;
    let h = (t_end - t0) / steps as f64;
    let cap = (steps / stride + 2) as usize;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    times.push(t0);
    states.push(y0);
    let mut y = y0;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        y = rk4_step(&mut f, t, &y, h)?;
        let done = k + 1 == steps;
        if done || (k + 1) % stride == 0 {
            times.push(if done { t_end } else { t0 + (k + 1) as f64 * h });
            states.push(y);
        }
    }
    Ok((times, states))
}
