//! Brent's derivative-free scalar minimizer.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinimizeError {
    #[error("bracket [{a}, {b}] is empty or not finite")]
    BadBracket { a: f64, b: f64 },
    #[error("no convergence after {iterations} iterations (best x = {x})")]
    NotConverged { iterations: usize, x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Minimizes `f` on `[a, b]` by golden-section search with parabolic
/// interpolation. `xtol` is a relative tolerance on the abscissa.
pub fn brent<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, xtol: f64) -> Result<Minimum, MinimizeError> {
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(MinimizeError::BadBracket { a, b });
    }
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x = lo + GOLD * (hi - lo);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut step: f64 = 0.0;
    let mut prev_step: f64 = 0.0;
    let abs_floor = 1e-300;
    for iteration in 1..=500 {
        let mid = 0.5 * (lo + hi);
        let tol1 = xtol * x.abs() + abs_floor;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (hi - lo) {
            return Ok(Minimum {
                x,
                fx,
                iterations: iteration,
            });
        }
        let mut golden = true;
        if prev_step.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let older = prev_step;
            if p.abs() < (0.5 * q * older).abs() && p > q * (lo - x) && p < q * (hi - x) {
                prev_step = step;
                step = p / q;
                let u = x + step;
                if u - lo < tol2 || hi - u < tol2 {
                    step = if mid >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            prev_step = if x >= mid { lo - x } else { hi - x };
            step = GOLD * prev_step;
        }
        let u = if step.abs() >= tol1 {
            x + step
        } else if step > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(MinimizeError::NotConverged { iterations: 500, x })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_minimum() {
        let m = brent(|x| (x - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-10).unwrap();
        assert!((m.x - 0.3).abs() < 1e-9, "{}", m.x);
    }

    #[test]
    fn cosine_minimum() {
        let m = brent(|x: f64| x.cos(), 2.0, 4.5, 1e-10).unwrap();
        assert!((m.x - std::f64::consts::PI).abs() < 1e-8);
    }
}
