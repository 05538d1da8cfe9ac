//! Adaptive Gauss-Kronrod quadrature.
//!
//! `integrate` is a globally adaptive 7/15-point Gauss-Kronrod scheme on a
//! finite interval (bisect the worst interval until the summed error estimate
//! meets the tolerance). `integrate_decaying` covers `[a, ∞)` for integrands
//! with a known tail bound by laying down panels until the remaining tail can
//! no longer matter.

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Requested accuracy: the estimate is accepted once
/// `error <= max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0 }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {intervals} intervals")]
    NotConverged {
        value: f64,
        error: f64,
        intervals: usize,
    },
    #[error("integrand is not finite at x = {x:e}")]
    NonFinite { x: f64 },
    #[error("integration bounds must be finite (got [{a}, {b}])")]
    BadBounds { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { x: center });
    }
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let f1 = f(x1);
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { x: x1 });
        }
        let f2 = f(x2);
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { x: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (1.0_f64).min((200.0 * error / res_asc).powf(1.5));
    }
    let round_off = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(round_off);
    }
    Ok(Segment { a, b, value, error })
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_intervals: usize,
) -> Result<Integral, QuadError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QuadError::BadBounds { a, b });
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut segments = vec![kronrod15(&mut f, a, b)?];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tol.target(value) {
            segments.sort_by(|x, y| x.a.total_cmp(&y.a));
            let value = segments.iter().map(|s| s.value).sum();
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= max_intervals {
            return Err(QuadError::NotConverged {
                value,
                error,
                intervals: segments.len(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a.min(seg.b) || mid >= seg.a.max(seg.b) {
            // Interval cannot be split any further in floating point.
            return Err(QuadError::NotConverged {
                value,
                error,
                intervals: segments.len(),
            });
        }
        let left = kronrod15(&mut f, seg.a, mid)?;
        let right = kronrod15(&mut f, mid, seg.b)?;
        evaluations += 30;
        segments[worst] = left;
        segments.push(right);
    }
}

/// Panel layout for [`integrate_decaying`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panels {
    /// Width of the first panel.
    pub first_width: f64,
    /// Each panel is `growth` times wider than the previous one (≥ 1).
    pub growth: f64,
    /// Hard cap on the number of panels.
    pub max_panels: usize,
}

/// Integrates `f` over `[a, ∞)`.
///
/// `tail_bound(x)` must bound `|∫_x^∞ f|`. Panels are added until that bound
/// falls below the tolerance target of the accumulated value.
pub fn integrate_decaying<F, B>(
    mut f: F,
    a: f64,
    panels: Panels,
    tol: Tolerance,
    tail_bound: B,
) -> Result<Integral, QuadError>
where
    F: FnMut(f64) -> f64,
    B: Fn(f64) -> f64,
{
    if !a.is_finite() || !(panels.first_width > 0.0) {
        return Err(QuadError::BadBounds { a, b: f64::INFINITY });
    }
    let mut total: f64 = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut lo = a;
    let mut width = panels.first_width;
    for _ in 0..panels.max_panels {
        let hi = lo + width;
        let panel_tol = Tolerance {
            rel: tol.rel,
            abs: tol.abs.max(0.1 * tol.rel * total.abs()),
        };
        let part = integrate(&mut f, lo, hi, panel_tol, 400)?;
        total += part.value;
        error += part.error;
        evaluations += part.evaluations;
        let tail = tail_bound(hi);
        if tail <= tol.target(total) {
            return Ok(Integral {
                value: total,
                error: error + tail,
                evaluations,
            });
        }
        lo = hi;
        width *= panels.growth.max(1.0);
    }
    Err(QuadError::NotConverged {
        value: total,
        error: error + tail_bound(lo),
        intervals: panels.max_panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x + 1.0, 0.0, 2.0, Tolerance::relative(1e-12), 50).unwrap();
        assert!((r.value - 10.0).abs() < 1e-12);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫_0^1 x ln x dx = -1/4
        let r = integrate(|x| x * x.ln(), 0.0, 1.0, Tolerance::relative(1e-12), 200).unwrap();
        assert!((r.value + 0.25).abs() < 1e-12, "{}", r.value);
        // ∫_0^1 ln x dx = -1
        let r = integrate(|x| x.ln(), 0.0, 1.0, Tolerance::relative(1e-10), 400).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let r = integrate(|x| x.cos(), 1.0, 0.0, Tolerance::relative(1e-12), 50).unwrap();
        assert!((r.value + 1f64.sin()).abs() < 1e-13);
    }

    #[test]
    fn decaying_integral_of_bose_kernel() {
        // ∫_0^∞ x^3/(e^x - 1) dx = π^4/15
        let tail = |x: f64| (x.powi(3) + 3.0 * x * x + 6.0 * x + 6.0) * (-x).exp() / (-(-x).exp_m1());
        let r = integrate_decaying(
            |x: f64| x.powi(3) / x.exp_m1(),
            0.0,
            Panels {
                first_width: 1.0,
                growth: 2.0,
                max_panels: 60,
            },
            Tolerance::relative(1e-12),
            tail,
        )
        .unwrap();
        let exact = std::f64::consts::PI.powi(4) / 15.0;
        assert!((r.value / exact - 1.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate(|x| 1.0 / (x - 0.5), 0.0, 1.0, Tolerance::relative(1e-8), 50);
        assert!(matches!(r, Err(QuadError::NonFinite { .. })));
    }

    #[test]
    fn interval_budget_exhaustion_is_an_error() {
        let r = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, Tolerance::relative(1e-14), 4);
        assert!(matches!(r, Err(QuadError::NotConverged { .. })));
    }
}
