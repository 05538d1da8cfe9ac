//! Physical constants (CODATA 2018, SI) and the distance error budget.
//!
//! Every formula in the crate reads its constants from here. Units are SI
//! throughout: meters, volts, newtons, joules, kelvin, rad/s.

use thiserror::Error;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Speed of light in vacuum (m/s).
pub const C: f64 = 299_792_458.0;

/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;

/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_8128e-12;

/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// The constant set as a value, for callers that want to carry it around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub hbar: f64,
    pub c: f64,
    pub k_b: f64,
    pub eps0: f64,
    pub e_charge: f64,
}

pub const CODATA_2018: Constants = Constants {
    hbar: HBAR,
    c: C,
    k_b: K_B,
    eps0: EPS0,
    e_charge: E_CHARGE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BudgetError {
    #[error("power-law exponent is zero: force has no distance sensitivity")]
    ZeroExponent,
    #[error("{name} must be positive and finite (got {value})")]
    Domain { name: &'static str, value: f64 },
}

/// Distance accuracy needed so that a power law `F ∝ d^n` is known to the
/// relative accuracy `force_fraction`: `δd = force_fraction·d/|n|`.
pub fn error_budget(n: f64, d: f64, force_fraction: f64) -> Result<f64, BudgetError> {
    if !(d.is_finite() && d > 0.0) {
        return Err(BudgetError::Domain { name: "d", value: d });
    }
    if !(force_fraction.is_finite() && force_fraction > 0.0) {
        return Err(BudgetError::Domain {
            name: "force_fraction",
            value: force_fraction,
        });
    }
    if !n.is_finite() {
        return Err(BudgetError::Domain { name: "n", value: n });
    }
    if n == 0.0 {
        return Err(BudgetError::ZeroExponent);
    }
    Ok(force_fraction * d / n.abs())
}
