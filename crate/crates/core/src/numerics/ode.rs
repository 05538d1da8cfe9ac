//! Scalar adaptive RK4 with step doubling.
//!
//! Each step is taken once with `h` and twice with `h/2`; the difference
//! estimates the local error (divided by 15 for a fourth-order method) and
//! the accepted value carries the Richardson correction.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t:e} (h = {h:e}, y = {y:e}): problem is too stiff for the requested tolerance")]
    StepUnderflow { t: f64, h: f64, y: f64 },
    #[error("right-hand side is not finite at t = {t:e}, y = {y:e}")]
    NonFinite { t: f64, y: f64 },
    #[error("step budget of {steps} exhausted at t = {t:e}")]
    TooManySteps { steps: usize, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-15,
            max_steps: 200_000,
        }
    }
}

/// One accepted node of the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeNode {
    pub t: f64,
    pub y: f64,
    pub dy: f64,
    /// Local error estimate of the step that produced this node.
    pub local_error: f64,
}

fn rk4_step<F: Fn(f64, f64) -> f64>(f: &F, t: f64, y: f64, h: f64) -> f64 {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    let k4 = f(t + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction) and
/// returns every accepted node, starting with the initial condition.
pub fn solve<F: Fn(f64, f64) -> f64>(
    f: F,
    t0: f64,
    y0: f64,
    t1: f64,
    opts: OdeOptions,
) -> Result<Vec<OdeNode>, OdeError> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let dy0 = f(t0, y0);
    if !dy0.is_finite() {
        return Err(OdeError::NonFinite { t: t0, y: y0 });
    }
    let mut nodes = vec![OdeNode {
        t: t0,
        y: y0,
        dy: dy0,
        local_error: 0.0,
    }];
    if span == 0.0 {
        return Ok(nodes);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * span * 1e-3;
    let min_h = 1e-13 * span.max(t0.abs()).max(t1.abs());
    for _ in 0..opts.max_steps {
        let remaining = t1 - t;
        if remaining * dir <= 0.0 {
            return Ok(nodes);
        }
        if (h * dir) > remaining * dir {
            h = remaining;
        }
        let full = rk4_step(&f, t, y, h);
        let half = rk4_step(&f, t, y, 0.5 * h);
        let two_halves = rk4_step(&f, t + 0.5 * h, half, 0.5 * h);
        if !(full.is_finite() && two_halves.is_finite()) {
            return Err(OdeError::NonFinite { t, y });
        }
        let err = (two_halves - full).abs() / 15.0;
        let scale = opts.atol + opts.rtol * y.abs().max(two_halves.abs());
        let ratio = err / scale;
        if ratio <= 1.0 {
            t = if (t1 - (t + h)) * dir <= min_h { t1 } else { t + h };
            y = two_halves + (two_halves - full) / 15.0;
            let dy = f(t, y);
            if !dy.is_finite() {
                return Err(OdeError::NonFinite { t, y });
            }
            nodes.push(OdeNode {
                t,
                y,
                dy,
                local_error: err,
            });
        }
        let factor = if ratio == 0.0 {
            4.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 4.0)
        };
        h *= factor;
        if h.abs() < min_h {
            return Err(OdeError::StepUnderflow { t, h, y });
        }
    }
    Err(OdeError::TooManySteps {
        steps: opts.max_steps,
        t,
    })
}
