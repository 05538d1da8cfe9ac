//! Dielectric response models on the real and imaginary frequency axes.
//!
//! Conventions (SI): the conductor model is ε(ω) = 1 + iσ/(ε0ω), which is
//! the SI form of the Gaussian 1 + 4πiσ/ω. On the imaginary axis it becomes
//! 1 + σ/(ε0ξ).

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{C, EPS0};
use crate::numerics::quad::{integrate, Tolerance};
use crate::table::{read_table, read_table_file, TableError};

/// Minimum number of optical samples accepted by [`build_tabulated`].
pub const MIN_OPTICAL_SAMPLES: usize = 8;
/// Points per decade of the imaginary-frequency grid of tabulated models.
pub const XI_POINTS_PER_DECADE: usize = 24;
// Sub-intervals per data interval in the trapezoid rule.
const TRAPEZOID_REFINE: usize = 16;

#[derive(Debug, Error)]
pub enum PermittivityError {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("{model} has no real-frequency representation")]
    Unsupported { model: &'static str },
    #[error("need at least {need} optical samples, got {got}")]
    InsufficientData { got: usize, need: usize },
    #[error("optical data row {index}: {reason}")]
    Format { index: usize, reason: String },
    #[error(transparent)]
    Table(#[from] TableError),
}

type Result<T> = std::result::Result<T, PermittivityError>;

/// Samples of ε(iξ) on an increasing ξ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedGrid {
    pub xi: Vec<f64>,
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum PermittivityModel {
    PerfectConductor,
    ConstantEps { eps: f64 },
    Plasma { omega_p: f64 },
    Drude { omega_p: f64, gamma: f64 },
    /// `base(iξ) + ω_p²/ξ²` with a Drude or tabulated base.
    GeneralizedPlasma {
        base: Box<PermittivityModel>,
        omega_p: f64,
    },
    Conductor { sigma: f64 },
    Tabulated { grid: TabulatedGrid },
}

/// Value of ε(iξ) plus whether it came from extrapolation beyond a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub eps: f64,
    pub extrapolated: bool,
}

/// Behaviour of ε(iξ) as ξ → 0.
///
/// `static_eps` is the limit of ε itself (infinite for conductors) and
/// `k2` the limit of ξ²ε(iξ)/c², non-zero only for plasma-like response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroFrequency {
    pub static_eps: f64,
    pub k2: f64,
}

impl ZeroFrequency {
    pub fn is_conducting(&self) -> bool {
        self.static_eps.is_infinite()
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(PermittivityError::Domain {
            name,
            requirement: "finite and > 0",
            value,
        })
    }
}

impl PermittivityModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::PerfectConductor => "perfect_conductor",
            Self::ConstantEps { .. } => "constant_eps",
            Self::Plasma { .. } => "plasma",
            Self::Drude { .. } => "drude",
            Self::GeneralizedPlasma { .. } => "generalized_plasma",
            Self::Conductor { .. } => "conductor",
            Self::Tabulated { .. } => "tabulated",
        }
    }

    pub fn vacuum() -> Self {
        Self::ConstantEps { eps: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::PerfectConductor => Ok(()),
            Self::ConstantEps { eps } => {
                if eps.is_finite() && *eps >= 1.0 {
                    Ok(())
                } else {
                    Err(PermittivityError::Domain {
                        name: "eps",
                        requirement: "finite and >= 1",
                        value: *eps,
                    })
                }
            }
            Self::Plasma { omega_p } => positive("omega_p", *omega_p),
            Self::Drude { omega_p, gamma } => {
                positive("omega_p", *omega_p)?;
                positive("gamma", *gamma)
            }
            Self::GeneralizedPlasma { base, omega_p } => {
                positive("omega_p", *omega_p)?;
                match base.as_ref() {
                    Self::Drude { .. } | Self::Tabulated { .. } => base.validate(),
                    other => Err(PermittivityError::Invalid(format!(
                        "generalized plasma base must be drude or tabulated, got {}",
                        other.name()
                    ))),
                }
            }
            Self::Conductor { sigma } => positive("sigma", *sigma),
            Self::Tabulated { grid } => validate_grid(grid),
        }
    }

    /// Limits of the response at zero frequency.
    ///
    /// Tabulated grids are classified by the log-log slope s of ε−1 at the
    /// two lowest points: |s| < 0.1 reads as a dielectric with static value
    /// ε(ξ_min), s ≤ −1.95 as plasma-like, anything in between as a
    /// dissipative conductor.
    pub fn zero_frequency(&self) -> ZeroFrequency {
        match self {
            Self::PerfectConductor => ZeroFrequency {
                static_eps: f64::INFINITY,
                k2: f64::INFINITY,
            },
            Self::ConstantEps { eps } => ZeroFrequency { static_eps: *eps, k2: 0.0 },
            Self::Plasma { omega_p } => ZeroFrequency {
                static_eps: f64::INFINITY,
                k2: (omega_p / C).powi(2),
            },
            Self::Drude { .. } | Self::Conductor { .. } => ZeroFrequency {
                static_eps: f64::INFINITY,
                k2: 0.0,
            },
            Self::GeneralizedPlasma { base, omega_p } => {
                let b = base.zero_frequency();
                ZeroFrequency {
                    static_eps: f64::INFINITY,
                    k2: b.k2 + (omega_p / C).powi(2),
                }
            }
            Self::Tabulated { grid } => {
                let (x0, x1) = (grid.xi[0], grid.xi[1]);
                let (e0, e1) = (grid.eps[0] - 1.0, grid.eps[1] - 1.0);
                if e0 <= 0.0 || e1 <= 0.0 {
                    return ZeroFrequency { static_eps: grid.eps[0], k2: 0.0 };
                }
                let s = (e1 / e0).ln() / (x1 / x0).ln();
                if s.abs() < 0.1 {
                    ZeroFrequency { static_eps: grid.eps[0], k2: 0.0 }
                } else if s <= -1.95 {
                    ZeroFrequency {
                        static_eps: f64::INFINITY,
                        k2: x0 * x0 * e0 / (C * C),
                    }
                } else {
                    ZeroFrequency {
                        static_eps: f64::INFINITY,
                        k2: 0.0,
                    }
                }
            }
        }
    }
}

fn validate_grid(grid: &TabulatedGrid) -> Result<()> {
    if grid.xi.len() != grid.eps.len() {
        return Err(PermittivityError::Invalid("xi and eps lengths differ".into()));
    }
    if grid.xi.len() < 2 {
        return Err(PermittivityError::InsufficientData {
            got: grid.xi.len(),
            need: 2,
        });
    }
    for i in 0..grid.xi.len() {
        let (x, e) = (grid.xi[i], grid.eps[i]);
        if !(x.is_finite() && x > 0.0 && e.is_finite() && e >= 1.0) {
            return Err(PermittivityError::Format {
                index: i,
                reason: format!("need xi > 0 and eps >= 1, got ({x}, {e})"),
            });
        }
        if i > 0 && (x <= grid.xi[i - 1] || e > grid.eps[i - 1]) {
            return Err(PermittivityError::Format {
                index: i,
                reason: "xi must increase and eps must not increase".into(),
            });
        }
    }
    Ok(())
}

/// ε(iξ) for ξ > 0. Perfect conductors return +∞.
pub fn eval_imaginary(model: &PermittivityModel, xi: f64) -> Result<f64> {
    eval_imaginary_flagged(model, xi).map(|e| e.eps)
}

/// Like [`eval_imaginary`], reporting whether a tabulated model had to be
/// extrapolated.
pub fn eval_imaginary_flagged(model: &PermittivityModel, xi: f64) -> Result<Evaluation> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(PermittivityError::Domain {
            name: "xi",
            requirement: "finite and > 0",
            value: xi,
        });
    }
    let exact = |eps| Ok(Evaluation { eps, extrapolated: false });
    match model {
        PermittivityModel::PerfectConductor => exact(f64::INFINITY),
        PermittivityModel::ConstantEps { eps } => exact(*eps),
        PermittivityModel::Plasma { omega_p } => exact(1.0 + (omega_p / xi).powi(2)),
        PermittivityModel::Drude { omega_p, gamma } => exact(1.0 + omega_p * omega_p / (xi * (xi + gamma))),
        PermittivityModel::GeneralizedPlasma { base, omega_p } => {
            let b = eval_imaginary_flagged(base, xi)?;
            Ok(Evaluation {
                eps: b.eps + (omega_p / xi).powi(2),
                extrapolated: b.extrapolated,
            })
        }
        PermittivityModel::Conductor { sigma } => exact(1.0 + sigma / (EPS0 * xi)),
        PermittivityModel::Tabulated { grid } => Ok(interpolate_grid(grid, xi)),
    }
}

/// Linear interpolation of ln(ε−1) against ln ξ. Outside the grid the end
/// segment's power law is continued with its slope clamped to ≤ 0.
fn interpolate_grid(grid: &TabulatedGrid, xi: f64) -> Evaluation {
    let n = grid.xi.len();
    let lx = xi.ln();
    let le = |i: usize| (grid.eps[i] - 1.0).max(f64::MIN_POSITIVE).ln();
    let lxi = |i: usize| grid.xi[i].ln();
    let extrapolated = xi < grid.xi[0] || xi > grid.xi[n - 1];
    let i = if xi <= grid.xi[0] {
        0
    } else if xi >= grid.xi[n - 1] {
        n - 2
    } else {
        grid.xi.partition_point(|&x| x <= xi) - 1
    };
    let mut slope = (le(i + 1) - le(i)) / (lxi(i + 1) - lxi(i));
    if extrapolated {
        slope = slope.min(0.0);
    }
    let anchor = if xi > grid.xi[n - 1] { i + 1 } else { i };
    let value = (le(anchor) + slope * (lx - lxi(anchor))).exp();
    let eps = if grid.eps[anchor] > 1.0 { 1.0 + value } else { 1.0 };
    Evaluation { eps, extrapolated }
}

/// ε(ω) on the real axis for analytic models.
pub fn eval_real(model: &PermittivityModel, omega: f64) -> Result<Complex64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(PermittivityError::Domain {
            name: "omega",
            requirement: "finite and > 0",
            value: omega,
        });
    }
    let one = Complex64::new(1.0, 0.0);
    match model {
        PermittivityModel::ConstantEps { eps } => Ok(Complex64::new(*eps, 0.0)),
        PermittivityModel::Plasma { omega_p } => Ok(one - (omega_p / omega).powi(2)),
        PermittivityModel::Drude { omega_p, gamma } => {
            Ok(one - omega_p * omega_p / (omega * Complex64::new(omega, *gamma)))
        }
        PermittivityModel::Conductor { sigma } => Ok(Complex64::new(1.0, sigma / (EPS0 * omega))),
        PermittivityModel::GeneralizedPlasma { base, omega_p } => {
            Ok(eval_real(base, omega)? - (omega_p / omega).powi(2))
        }
        PermittivityModel::PerfectConductor | PermittivityModel::Tabulated { .. } => {
            Err(PermittivityError::Unsupported { model: model.name() })
        }
    }
}

fn check_optical(data: &[(f64, f64)]) -> Result<()> {
    if data.len() < MIN_OPTICAL_SAMPLES {
        return Err(PermittivityError::InsufficientData {
            got: data.len(),
            need: MIN_OPTICAL_SAMPLES,
        });
    }
    for (i, &(w, e2)) in data.iter().enumerate() {
        if !(w.is_finite() && w > 0.0 && e2.is_finite() && e2 > 0.0) {
            return Err(PermittivityError::Format {
                index: i,
                reason: format!("need omega > 0 and eps2 > 0, got ({w}, {e2})"),
            });
        }
        if i > 0 && w <= data[i - 1].0 {
            return Err(PermittivityError::Format {
                index: i,
                reason: "omega must be strictly increasing".into(),
            });
        }
    }
    Ok(())
}

/// Extrapolation of ε″ below the lowest sample.
#[derive(Debug, Clone, Copy)]
enum LowTail {
    /// ε″ = A/(ω(ω²+γ²)) fitted through the two lowest points.
    Drude { amplitude: f64, gamma2: f64 },
    /// ε″ = ε″₁ (ω/ω₁)^s.
    PowerLaw { e1: f64, w1: f64, s: f64 },
}

impl LowTail {
    fn fit(data: &[(f64, f64)]) -> Self {
        let (w1, e1) = data[0];
        let (w2, e2) = data[1];
        let rho = (e1 * w1) / (e2 * w2);
        if rho > 1.0 {
            let gamma2 = (w2 * w2 - rho * w1 * w1) / (rho - 1.0);
            if gamma2 > 0.0 && gamma2.is_finite() {
                return Self::Drude {
                    amplitude: e1 * w1 * (w1 * w1 + gamma2),
                    gamma2,
                };
            }
        }
        // Clamp so that ∫ω ε″/(ω²+ξ²) dω converges at ω → 0.
        let s = ((e2 / e1).ln() / (w2 / w1).ln()).max(-1.9);
        Self::PowerLaw { e1, w1, s }
    }

    fn eps2(&self, w: f64) -> f64 {
        match *self {
            Self::Drude { amplitude, gamma2 } => amplitude / (w * (w * w + gamma2)),
            Self::PowerLaw { e1, w1, s } => e1 * (w / w1).powf(s),
        }
    }

    /// Power of ω with which ω²ε″ vanishes as ω → 0.
    fn low_exponent(&self) -> f64 {
        match *self {
            Self::Drude { .. } => 1.0,
            Self::PowerLaw { s, .. } => 2.0 + s,
        }
    }
}

/// Dispersion integral ε(iξ) = 1 + (2/π)∫ω ε″(ω)/(ω²+ξ²) dω over the
/// samples (log-log interpolated, trapezoid in ln ω) and both tails.
fn dispersion_integral(data: &[(f64, f64)], low: LowTail, xi: f64) -> f64 {
    // In u = ln ω the integrand is ω²ε″/(ω²+ξ²).
    let g = |w: f64, e2: f64| w * w * e2 / (w * w + xi * xi);
    let tol = Tolerance { rel: 1e-10, abs: 0.0 };

    let mut body = 0.0;
    for pair in data.windows(2) {
        let (w0, e0) = pair[0];
        let (w1, e1) = pair[1];
        let (u0, u1) = (w0.ln(), w1.ln());
        let slope = (e1 / e0).ln() / (u1 - u0);
        let h = (u1 - u0) / TRAPEZOID_REFINE as f64;
        let mut seg = 0.5 * (g(w0, e0) + g(w1, e1));
        for j in 1..TRAPEZOID_REFINE {
            let u = u0 + j as f64 * h;
            let w = u.exp();
            seg += g(w, e0 * ((u - u0) * slope).exp());
        }
        body += seg * h;
    }

    let (w_lo, _) = data[0];
    let u_lo = w_lo.ln();
    let span_lo = 40.0 / low.low_exponent();
    let low_part = integrate(|u| {
        let w = u.exp();
        g(w, low.eps2(w))
    }, u_lo - span_lo, u_lo, tol, 200)
    .map(|r| r.value)
    .unwrap_or_else(|e| match e {
        crate::numerics::quad::QuadError::NotConverged { value, .. } => value,
        _ => 0.0,
    });

    let (w_hi, e_hi) = data[data.len() - 1];
    let u_hi = w_hi.ln();
    let high_part = integrate(|u| {
        let w = u.exp();
        g(w, e_hi * (w_hi / w).powi(3))
    }, u_hi, u_hi + 15.0, tol, 200)
    .map(|r| r.value)
    .unwrap_or_else(|e| match e {
        crate::numerics::quad::QuadError::NotConverged { value, .. } => value,
        _ => 0.0,
    });

    1.0 + 2.0 / std::f64::consts::PI * (body + low_part + high_part)
}

/// Transforms optical absorption data (ω, ε″(ω)) into a tabulated
/// imaginary-axis model on a log ξ grid spanning the data range.
///
/// Below the data, ε″ is continued by a Drude form through the two lowest
/// points (a power law if that fit is not physical); above, as ω⁻³.
pub fn build_tabulated(data: &[(f64, f64)]) -> Result<PermittivityModel> {
    check_optical(data)?;
    let low = LowTail::fit(data);
    let (w_min, w_max) = (data[0].0, data[data.len() - 1].0);
    let decades = (w_max / w_min).log10();
    let n = ((decades * XI_POINTS_PER_DECADE as f64).ceil() as usize).max(1) + 1;
    let step = (w_max / w_min).ln() / (n - 1) as f64;
    let mut xi = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    for i in 0..n {
        let x = if i == n - 1 { w_max } else { w_min * (step * i as f64).exp() };
        let mut e = dispersion_integral(data, low, x);
        // ε(iξ) is monotone; remove round-off wiggles.
        if let Some(&prev) = eps.last() {
            e = e.min(prev);
        }
        xi.push(x);
        eps.push(e.max(1.0));
    }
    Ok(PermittivityModel::Tabulated {
        grid: TabulatedGrid { xi, eps },
    })
}

fn optical_rows(rows: Vec<Vec<f64>>) -> Vec<(f64, f64)> {
    rows.into_iter().map(|r| (r[0], r[1])).collect()
}

/// Reads `omega_rad_s,eps2` optical data.
pub fn read_optical_data<R: std::io::Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let t = read_table(reader, &["omega_rad_s", "eps2"], &[])?;
    Ok(optical_rows(t.rows))
}

pub fn read_optical_file(path: &Path) -> Result<Vec<(f64, f64)>> {
    let t = read_table_file(path, &["omega_rad_s", "eps2"], &[])?;
    Ok(optical_rows(t.rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const WP: f64 = 1.37e16;
    const GAMMA: f64 = 5.3e13;

    fn drude() -> PermittivityModel {
        PermittivityModel::Drude { omega_p: WP, gamma: GAMMA }
    }

    fn drude_eps2(w: f64) -> f64 {
        WP * WP * GAMMA / (w * (w * w + GAMMA * GAMMA))
    }

    #[test]
    fn closed_form_values() {
        let p = PermittivityModel::Plasma { omega_p: 2.0e15 };
        assert_eq!(eval_imaginary(&p, 2.0e15).unwrap(), 2.0);
        // 1 + 1.37e16² / (1e15 · 1.053e15)
        let expected = 1.0 + 1.876_9e32 / (1e15 * 1.053e15);
        let got = eval_imaginary(&drude(), 1e15).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
        assert!((got - 179.2).abs() < 0.05);
        let c = PermittivityModel::ConstantEps { eps: 16.0 };
        assert_eq!(eval_imaginary(&c, 3.3e11).unwrap(), 16.0);
    }

    #[test]
    fn nonpositive_xi_is_domain_error() {
        assert!(eval_imaginary(&drude(), 0.0).is_err());
        assert!(eval_imaginary(&drude(), -1.0).is_err());
    }

    #[test]
    fn real_axis_values() {
        let wp = 1e16;
        let p = PermittivityModel::Plasma { omega_p: wp };
        assert!(eval_real(&p, wp).unwrap().norm() < 1e-15);
        let z = eval_real(&p, wp / 2f64.sqrt()).unwrap();
        assert!((z.re + 1.0).abs() < 1e-12 && z.im == 0.0);
        let sigma = 4.1e7;
        let z = eval_real(&PermittivityModel::Conductor { sigma }, 1e14).unwrap();
        assert_eq!(z.re, 1.0);
        assert!((z.im - sigma / (EPS0 * 1e14)).abs() < 1e-12 * z.im);
        let z = eval_real(&drude(), 1e15).unwrap();
        assert!(z.im > 0.0 && z.re < 0.0);
        assert!(matches!(
            eval_real(&PermittivityModel::PerfectConductor, 1.0),
            Err(PermittivityError::Unsupported { .. })
        ));
    }

    #[test]
    fn validation() {
        assert!(PermittivityModel::ConstantEps { eps: 0.5 }.validate().is_err());
        assert!(PermittivityModel::Drude { omega_p: 1.0, gamma: 0.0 }.validate().is_err());
        let bad = PermittivityModel::GeneralizedPlasma {
            base: Box::new(PermittivityModel::Plasma { omega_p: 1.0 }),
            omega_p: 1.0,
        };
        assert!(bad.validate().is_err());
        let grid = TabulatedGrid { xi: vec![1.0, 2.0], eps: vec![2.0, 3.0] };
        assert!(PermittivityModel::Tabulated { grid }.validate().is_err());
    }

    #[test]
    fn serde_tagging() {
        let m: PermittivityModel = serde_json::from_str(r#"{"model":"drude","omega_p":1e16,"gamma":1e13}"#).unwrap();
        assert_eq!(m, PermittivityModel::Drude { omega_p: 1e16, gamma: 1e13 });
        let g: PermittivityModel = serde_json::from_str(
            r#"{"model":"generalized_plasma","omega_p":1e14,"base":{"model":"drude","omega_p":1e16,"gamma":1e13}}"#,
        )
        .unwrap();
        assert!(g.validate().is_ok());
        assert!(serde_json::from_str::<PermittivityModel>(r#"{"model":"plasma","omega_p":1,"x":2}"#).is_err());
    }

    #[test]
    fn zero_frequency_limits() {
        assert_eq!(drude().zero_frequency().k2, 0.0);
        let p = PermittivityModel::Plasma { omega_p: WP }.zero_frequency();
        assert!((p.k2 - (WP / C).powi(2)).abs() < 1e-6 * p.k2);
        assert_eq!(PermittivityModel::ConstantEps { eps: 3.0 }.zero_frequency().static_eps, 3.0);
    }

    #[test]
    fn tabulated_needs_enough_ordered_data() {
        assert!(matches!(build_tabulated(&[]), Err(PermittivityError::InsufficientData { .. })));
        assert!(matches!(
            build_tabulated(&[(1.0, 1.0), (2.0, 1.0)]),
            Err(PermittivityError::InsufficientData { .. })
        ));
        let mut data: Vec<(f64, f64)> = (0..10).map(|i| (1.0 + i as f64, 1.0)).collect();
        data.swap(3, 4);
        assert!(matches!(build_tabulated(&data), Err(PermittivityError::Format { .. })));
    }

    #[test]
    fn tabulated_drude_matches_analytic() {
        // 6 decades of samples, 20 per decade.
        let data: Vec<(f64, f64)> = (0..=120)
            .map(|i| {
                let w = 1e12 * 10f64.powf(i as f64 / 20.0);
                (w, drude_eps2(w))
            })
            .collect();
        let model = build_tabulated(&data).unwrap();
        model.validate().unwrap();
        for i in 0..=40 {
            let xi = 1e13 * 10f64.powf(i as f64 / 10.0);
            let got = eval_imaginary_flagged(&model, xi).unwrap();
            assert!(!got.extrapolated);
            let want = eval_imaginary(&drude(), xi).unwrap();
            assert!((got.eps / want - 1.0).abs() < 0.01, "xi={xi:e} got {} want {want}", got.eps);
        }
        let out = eval_imaginary_flagged(&model, 1e19).unwrap();
        assert!(out.extrapolated && out.eps >= 1.0);
        // Drude-like low end classifies as a dissipative conductor.
        let z = model.zero_frequency();
        assert!(z.is_conducting() && z.k2 == 0.0);
    }

    #[test]
    fn optical_csv() {
        let text = "omega_rad_s,eps2\n1e14,3.0\n2e14,1.5\n";
        assert_eq!(read_optical_data(text.as_bytes()).unwrap(), vec![(1e14, 3.0), (2e14, 1.5)]);
        assert!(read_optical_data("w,e\n1,2\n".as_bytes()).is_err());
    }

    fn analytic_model() -> impl Strategy<Value = PermittivityModel> {
        prop_oneof![
            (1.0f64..100.0).prop_map(|eps| PermittivityModel::ConstantEps { eps }),
            (1e13f64..1e17).prop_map(|omega_p| PermittivityModel::Plasma { omega_p }),
            (1e13f64..1e17, 1e11f64..1e15).prop_map(|(omega_p, gamma)| PermittivityModel::Drude { omega_p, gamma }),
            (1e3f64..1e8).prop_map(|sigma| PermittivityModel::Conductor { sigma }),
            (1e13f64..1e17, 1e11f64..1e15, 1e12f64..1e16).prop_map(|(w, gamma, omega_p)| {
                PermittivityModel::GeneralizedPlasma {
                    base: Box::new(PermittivityModel::Drude { omega_p: w, gamma }),
                    omega_p,
                }
            }),
        ]
    }

    proptest! {
        #[test]
        fn analytic_models_are_real_above_one_and_monotone(
            model in analytic_model(),
            lx in 10.0f64..18.0,
            ratio in 1.0f64..100.0,
        ) {
            let xi = 10f64.powf(lx);
            let a = eval_imaginary(&model, xi).unwrap();
            let b = eval_imaginary(&model, xi * ratio).unwrap();
            prop_assert!(a.is_finite() && a >= 1.0);
            prop_assert!(b <= a);
        }

        #[test]
        fn generalized_plasma_dominates_base(
            w in 1e13f64..1e17, gamma in 1e11f64..1e15, wp in 1e12f64..1e16, lx in 10.0f64..18.0,
        ) {
            let base = PermittivityModel::Drude { omega_p: w, gamma };
            let gp = PermittivityModel::GeneralizedPlasma { base: Box::new(base.clone()), omega_p: wp };
            let xi = 10f64.powf(lx);
            prop_assert!(eval_imaginary(&gp, xi).unwrap() >= eval_imaginary(&base, xi).unwrap());
        }

        #[test]
        fn drude_tends_to_plasma(w in 1e13f64..1e17, lx in 11.0f64..18.0) {
            let xi = 10f64.powf(lx);
            let plasma = eval_imaginary(&PermittivityModel::Plasma { omega_p: w }, xi).unwrap();
            let mut prev = f64::INFINITY;
            for k in 0..6 {
                let gamma = xi * 10f64.powi(-(k + 1));
                let d = eval_imaginary(&PermittivityModel::Drude { omega_p: w, gamma }, xi).unwrap();
                let gap = (plasma - d) / plasma;
                prop_assert!(gap >= 0.0 && gap < prev);
                prev = gap;
            }
            prop_assert!(prev < 1e-5);
        }
    }
}
