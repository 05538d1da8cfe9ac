//! Debye-Hückel field penetration into semiconductor plates.
//!
//! With y = εd/λ the screened parallel-plate energy is
//! E = ½ε0V²/d · (y + y²)/(y + 2)², i.e. an effective capacitance per
//! area ε0/d·(y + y²)/(y + 2)² that behaves as ε0/(d + 3λ/ε) for large y.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{E_CHARGE, EPS0, K_B};
use crate::numerics::lsq::{levenberg_marquardt, FitError, LeastSquaresProblem, LmOptions};

/// Below this y the small-screening picture behind the offset breaks down.
pub const MIN_REGIME_Y: f64 = 3.0;
const OFFSET_GRID_POINTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScreeningError {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("offset fit failed: {0}")]
    Fit(#[from] FitError),
}

type Result<T> = std::result::Result<T, ScreeningError>;

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ScreeningError::Domain {
            name,
            requirement: "finite and > 0",
            value,
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ScreeningError::Domain {
            name,
            requirement: "finite and >= 0",
            value,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiconductorPlate {
    pub eps_static: f64,
    /// Total carrier concentration c_h + c_e (m⁻³).
    pub carrier_density: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

/// λ = √(εε0k_bT/(e²c_t)).
pub fn debye_length(plate: &SemiconductorPlate) -> Result<f64> {
    positive("eps_static", plate.eps_static)?;
    positive("carrier_density", plate.carrier_density)?;
    positive("T", plate.t)?;
    Ok((plate.eps_static * EPS0 * K_B * plate.t / (E_CHARGE * E_CHARGE * plate.carrier_density)).sqrt())
}

/// Surface potential of each plate, (V/2)/(1 + 2λ/(εd)).
pub fn screened_surface_potential(v: f64, d: f64, lambda: f64, eps: f64) -> Result<f64> {
    positive("d", d)?;
    positive("eps", eps)?;
    non_negative("lambda", lambda)?;
    Ok(0.5 * v / (1.0 + 2.0 * lambda / (eps * d)))
}

/// Fraction (y + y²)/(y + 2)² of the unscreened energy; 1 at λ = 0.
fn screening_fraction(d: f64, lambda: f64, eps: f64) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    let y = eps * d / lambda;
    (y + y * y) / ((y + 2.0) * (y + 2.0))
}

/// Field energy per area between screened plates (J/m²).
pub fn screened_energy_per_area(v: f64, d: f64, lambda: f64, eps: f64) -> Result<f64> {
    positive("d", d)?;
    positive("eps", eps)?;
    non_negative("lambda", lambda)?;
    Ok(0.5 * EPS0 * v * v / d * screening_fraction(d, lambda, eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceOffset {
    /// δ from fitting ε0/(d + δ) to the screened capacitance.
    pub delta_total: f64,
    /// Large-y expansion of the same capacitance, 3λ/ε.
    pub three_lambda_over_eps: f64,
    /// λ/ε, the simpler scale estimate.
    pub lambda_over_eps: f64,
    /// Smallest y = εd/λ over the fit range.
    pub min_y: f64,
    /// Set when min_y < 3.
    pub regime_warning: bool,
}

struct OffsetFit {
    d: Vec<f64>,
    c: Vec<f64>,
}

impl LeastSquaresProblem for OffsetFit {
    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        self.d
            .iter()
            .zip(&self.c)
            .map(|(d, c)| EPS0 / (d + p[0]) / c - 1.0)
            .collect()
    }

    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.d.len(), 1, |i, _| {
            let s = self.d[i] + p[0];
            -EPS0 / (s * s) / self.c[i]
        })
    }
}

/// Apparent distance offset: relative least-squares fit of
/// ε0/(d + δ) to the screened capacitance per area on a log grid over
/// `d_range`.
pub fn apparent_distance_offset(lambda: f64, eps: f64, d_range: (f64, f64)) -> Result<DistanceOffset> {
    non_negative("lambda", lambda)?;
    positive("eps", eps)?;
    let (d0, d1) = d_range;
    positive("d_min", d0)?;
    positive("d_max", d1)?;
    if d1 <= d0 {
        return Err(ScreeningError::Domain {
            name: "d_max",
            requirement: "> d_min",
            value: d1,
        });
    }
    let min_y = if lambda == 0.0 { f64::INFINITY } else { eps * d0 / lambda };
    let regime_warning = min_y < MIN_REGIME_Y;
    if regime_warning {
        log::warn!("apparent_distance_offset: y = {min_y:.3} < {MIN_REGIME_Y} at the near end of the range");
    }
    if lambda == 0.0 {
        return Ok(DistanceOffset {
            delta_total: 0.0,
            three_lambda_over_eps: 0.0,
            lambda_over_eps: 0.0,
            min_y,
            regime_warning,
        });
    }
    let step = (d1 / d0).ln() / (OFFSET_GRID_POINTS - 1) as f64;
    let d: Vec<f64> = (0..OFFSET_GRID_POINTS).map(|i| d0 * (step * i as f64).exp()).collect();
    let c: Vec<f64> = d.iter().map(|&x| EPS0 / x * screening_fraction(x, lambda, eps)).collect();
    let guess = 3.0 * lambda / eps;
    let fit = levenberg_marquardt(&OffsetFit { d, c }, &[guess], LmOptions::default())?;
    Ok(DistanceOffset {
        delta_total: fit.params[0],
        three_lambda_over_eps: guess,
        lambda_over_eps: lambda / eps,
        min_y,
        regime_warning,
    })
}

/// Effective shielding-length ratio λ′/λ = |Φ|/√(e^Φ + e^{−Φ} − 2)
/// = |Φ|/(2 sinh(|Φ|/2)), equal to 1 at Φ = 0.
pub fn nonlinear_shielding_factor(phi: f64) -> Result<f64> {
    if !phi.is_finite() {
        return Err(ScreeningError::Domain {
            name: "Phi",
            requirement: "finite",
            value: phi,
        });
    }
    let a = phi.abs();
    if a < 1e-4 {
        return Ok(1.0 - a * a / 24.0);
    }
    // Large |Φ| overflows sinh long after the ratio has underflowed.
    if a > 1400.0 {
        return Ok(0.0);
    }
    Ok(a / (2.0 * (0.5 * a).sinh()))
}
