//! Patch-potential energies and the sphere-plane patch force.
//!
//! The force is F = πε0R ∫₀^∞ k²(coth kd − 1) S(k) dk. The prefactor πε0R is
//! fixed so that a spectrum with ∫k S(k) dk = V_rms² gives the proximity
//! limit πε0R·V_rms²/d at small d. The top-hat spectrum used here,
//! S(k) = V0²λ²·J1(λk)/(λk), has V_rms = V0.
//!
//! A single cosine mode V0·cos(k0·x) has V_rms² = V0²/2 and enters the
//! integral as S(k) = (V0²/2k0)·δ(k − k0); fed through the force integral it
//! gives exactly 2πR times [`single_mode_energy_per_area`].

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::EPS0;
use crate::numerics::bessel::{j1, j1_over_x};
use crate::numerics::quad::{integrate, integrate_decaying, Panels, QuadError, Tolerance};
use crate::table::{read_table, read_table_file, TableError};

use std::f64::consts::PI;

/// Bound on |J1(x)| over the real line (its first maximum is 0.5819).
const J1_BOUND: f64 = 0.582;

const OSCILLATORY_PANELS: Panels = Panels {
    first_width: 8.0,
    growth: 1.2,
    max_panels: 2000,
};

#[derive(Debug, Error)]
pub enum PatchError {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("single-mode spectrum is a delta function and has no pointwise value")]
    DiscreteSpectrum,
    #[error("k = {k:e} outside the tabulated spectrum range [{lo:e}, {hi:e}]")]
    OutOfRange { k: f64, lo: f64, hi: f64 },
    #[error("invalid spectrum table: {0}")]
    InvalidSpectrum(String),
    #[error("patch force quadrature: {0}")]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl PatchError {
    pub fn is_convergence(&self) -> bool {
        matches!(self, Self::Quadrature(QuadError::NotConverged { .. }))
    }
}

type Result<T> = std::result::Result<T, PatchError>;

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(PatchError::Domain {
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
        Err(PatchError::Domain {
            name,
            requirement: "finite and >= 0",
            value,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "spectrum", rename_all = "snake_case", deny_unknown_fields)]
pub enum PatchSpectrum {
    SingleMode {
        #[serde(rename = "V0")]
        v0: f64,
        k: f64,
    },
    TopHatCorrelation {
        #[serde(rename = "V0")]
        v0: f64,
        lambda_patch: f64,
    },
    /// S(k) samples, linearly interpolated; zero outside the table.
    Tabulated { k: Vec<f64>, s: Vec<f64> },
}

impl PatchSpectrum {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SingleMode { v0, k } => {
                non_negative("V0", *v0)?;
                positive("k", *k)
            }
            Self::TopHatCorrelation { v0, lambda_patch } => {
                non_negative("V0", *v0)?;
                positive("lambda_patch", *lambda_patch)
            }
            Self::Tabulated { k, s } => {
                if k.len() != s.len() || k.len() < 2 {
                    return Err(PatchError::InvalidSpectrum(
                        "need at least 2 (k, S) pairs of equal length".into(),
                    ));
                }
                for i in 0..k.len() {
                    if !(k[i].is_finite() && k[i] > 0.0 && s[i].is_finite() && s[i] >= 0.0) {
                        return Err(PatchError::InvalidSpectrum(format!("row {i}: need k > 0 and S >= 0")));
                    }
                    if i > 0 && k[i] <= k[i - 1] {
                        return Err(PatchError::InvalidSpectrum(format!("row {i}: k must increase")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Builds a tabulated spectrum from `k_rad_m,S_V2m2` CSV data.
    pub fn read_tabulated<R: std::io::Read>(reader: R) -> Result<Self> {
        let t = read_table(reader, &["k_rad_m", "S_V2m2"], &[])?;
        let spec = Self::Tabulated {
            k: t.column(0),
            s: t.column(1),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn read_tabulated_file(path: &Path) -> Result<Self> {
        let t = read_table_file(path, &["k_rad_m", "S_V2m2"], &[])?;
        let spec = Self::Tabulated {
            k: t.column(0),
            s: t.column(1),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// S(k) in V²·m².
pub fn spectrum_eval(spec: &PatchSpectrum, k: f64) -> Result<f64> {
    positive("k", k)?;
    spec.validate()?;
    match spec {
        PatchSpectrum::SingleMode { .. } => Err(PatchError::DiscreteSpectrum),
        PatchSpectrum::TopHatCorrelation { v0, lambda_patch } => {
            Ok(v0 * v0 * lambda_patch * lambda_patch * j1_over_x(lambda_patch * k))
        }
        PatchSpectrum::Tabulated { k: ks, s } => {
            crate::numerics::interp::linear(ks, s, k).ok_or(PatchError::OutOfRange {
                k,
                lo: ks[0],
                hi: ks[ks.len() - 1],
            })
        }
    }
}

/// Field energy per area of a single patch mode V0·cos(kx) facing a
/// grounded plane at distance d, with the d-independent part removed:
/// (ε0kV0²/4)(coth kd − 1).
pub fn single_mode_energy_per_area(v0: f64, k: f64, d: f64) -> Result<f64> {
    non_negative("V0", v0)?;
    positive("k", k)?;
    positive("d", d)?;
    Ok(EPS0 * k * v0 * v0 / 4.0 * coth_minus_one(k * d))
}

/// coth x − 1 = 2/(e^{2x} − 1).
fn coth_minus_one(x: f64) -> f64 {
    2.0 / (2.0 * x).exp_m1()
}

/// Sphere-plane patch force (N, attractive positive) to relative
/// tolerance `tol`.
pub fn patch_force_sphere_plane(spec: &PatchSpectrum, r: f64, d: f64, tol: f64) -> Result<f64> {
    positive("R", r)?;
    positive("d", d)?;
    positive("tol", tol)?;
    spec.validate()?;
    let tolerance = Tolerance { rel: tol, abs: 0.0 };
    match spec {
        PatchSpectrum::SingleMode { v0, k } => {
            Ok(PI * EPS0 * r * k * k * (v0 * v0 / (2.0 * k)) * coth_minus_one(k * d))
        }
        PatchSpectrum::TopHatCorrelation { v0, lambda_patch } => {
            if *v0 == 0.0 {
                return Ok(0.0);
            }
            // u = kλ: F = (2πε0R V0²/λ) ∫ u J1(u)/(e^{au} − 1) du, a = 2d/λ
            let a = 2.0 * d / lambda_patch;
            let integrand = |u: f64| u * j1(u) / (a * u).exp_m1();
            let tail = |hi: f64| {
                let e = (-a * hi).exp();
                J1_BOUND * (hi / a + 1.0 / (a * a)) * e / (1.0 - e)
            };
            let panels = Panels {
                first_width: OSCILLATORY_PANELS.first_width.min(4.0 / a),
                ..OSCILLATORY_PANELS
            };
            let integral = integrate_decaying(integrand, 0.0, panels, tolerance, tail)?;
            Ok(2.0 * PI * EPS0 * r * v0 * v0 / lambda_patch * integral.value)
        }
        PatchSpectrum::Tabulated { k, s } => {
            // F = 2πε0R ∫ k² S(k)/(e^{2kd} − 1) dk, S linear on each segment.
            let mut total = 0.0;
            for i in 0..k.len() - 1 {
                let (k0, k1) = (k[i], k[i + 1]);
                let (s0, s1) = (s[i], s[i + 1]);
                if s0 == 0.0 && s1 == 0.0 {
                    continue;
                }
                let f = |x: f64| {
                    let sv = s0 + (s1 - s0) * (x - k0) / (k1 - k0);
                    x * x * sv / (2.0 * x * d).exp_m1()
                };
                let abs = 0.1 * tol * total;
                total += integrate(f, k0, k1, Tolerance { rel: tol, abs }, 400)?.value;
            }
            Ok(2.0 * PI * EPS0 * r * total)
        }
    }
}
