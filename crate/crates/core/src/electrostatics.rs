//! Conductor capacitances, the electrostatic force ½|C′|V², and the αV²
//! distance calibration. Forces are positive when attractive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::EPS0;
use crate::numerics::interp::{distance_step, richardson_derivative, CubicSpline};

use std::f64::consts::PI;

/// Default relative truncation tolerance of the sphere-plane series.
pub const SERIES_TOL: f64 = 1e-12;
const SERIES_BUDGET: usize = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElectrostaticsError {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("image-charge series not converged after {terms} terms (partial sum {partial_sum:e})")]
    NotConverged { terms: usize, partial_sum: f64 },
    #[error("d = {d:e} m outside the sampled profile range [{lo:e}, {hi:e}]")]
    OutOfRange { d: f64, lo: f64, hi: f64 },
    #[error("invalid capacitance table: {0}")]
    InvalidProfile(String),
}

impl ElectrostaticsError {
    pub fn is_convergence(&self) -> bool {
        matches!(self, Self::NotConverged { .. })
    }
}

type Result<T> = std::result::Result<T, ElectrostaticsError>;

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ElectrostaticsError::Domain {
            name,
            requirement: "finite and > 0",
            value,
        })
    }
}

/// C(d) from a (d, C) table, interpolated by a natural cubic spline in
/// (ln d, ln C).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    d: Vec<f64>,
    spline: CubicSpline,
}

impl SampledProfile {
    pub fn new(d: &[f64], c: &[f64]) -> Result<Self> {
        if d.len() != c.len() || d.len() < 3 {
            return Err(ElectrostaticsError::InvalidProfile(
                "need at least 3 (d, C) pairs of equal length".into(),
            ));
        }
        for i in 0..d.len() {
            if !(d[i] > 0.0 && d[i].is_finite() && c[i] > 0.0 && c[i].is_finite()) {
                return Err(ElectrostaticsError::InvalidProfile(format!("row {i}: d and C must be positive")));
            }
            if i > 0 && d[i] <= d[i - 1] {
                return Err(ElectrostaticsError::InvalidProfile(format!("row {i}: d must increase")));
            }
        }
        let ld: Vec<f64> = d.iter().map(|v| v.ln()).collect();
        let lc: Vec<f64> = c.iter().map(|v| v.ln()).collect();
        Ok(Self {
            d: d.to_vec(),
            spline: CubicSpline::new(&ld, &lc),
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.d[0], self.d[self.d.len() - 1])
    }

    fn check(&self, d: f64) -> Result<()> {
        let (lo, hi) = self.range();
        if d >= lo && d <= hi {
            Ok(())
        } else {
            Err(ElectrostaticsError::OutOfRange { d, lo, hi })
        }
    }

    fn value(&self, d: f64) -> f64 {
        self.spline.eval(d.ln()).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CapacitanceProfile {
    ParallelPlate { area: f64 },
    SpherePlane { radius: f64, tol: f64 },
    Sampled(SampledProfile),
}

impl CapacitanceProfile {
    pub fn sphere_plane(radius: f64) -> Self {
        Self::SpherePlane { radius, tol: SERIES_TOL }
    }

    pub fn capacitance(&self, d: f64) -> Result<f64> {
        match self {
            Self::ParallelPlate { area } => parallel_plate_capacitance(*area, d),
            Self::SpherePlane { radius, tol } => sphere_plane_capacitance(*radius, d, *tol),
            Self::Sampled(s) => {
                s.check(d)?;
                Ok(s.value(d))
            }
        }
    }

    /// ∂C/∂d: closed forms for the analytic profiles, a Richardson-improved
    /// central difference of the spline for sampled ones.
    pub fn derivative(&self, d: f64) -> Result<f64> {
        match self {
            Self::ParallelPlate { area } => {
                positive("d", d)?;
                positive("A", *area)?;
                Ok(-EPS0 * area / (d * d))
            }
            Self::SpherePlane { radius, tol } => sphere_plane_series(*radius, d, *tol).map(|s| s.derivative),
            Self::Sampled(s) => {
                s.check(d)?;
                Ok(richardson_derivative(|x| s.value(x), d, distance_step(d)))
            }
        }
    }
}

pub fn parallel_plate_capacitance(area: f64, d: f64) -> Result<f64> {
    positive("d", d)?;
    if !(area.is_finite() && area >= 0.0) {
        return Err(ElectrostaticsError::Domain {
            name: "A",
            requirement: "finite and >= 0",
            value: area,
        });
    }
    Ok(EPS0 * area / d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Series {
    capacitance: f64,
    derivative: f64,
}

/// Image-charge series with cosh β = 1 + d/R:
/// C = 4πε0R sinh β Σ 1/sinh(nβ) and its d-derivative through
/// dβ/dd = 1/(R sinh β).
///
/// Successive terms shrink at least by e^{−β}, so the series is cut once
/// the geometric bound on the remaining tail drops below `tol`·sum.
fn sphere_plane_series(r: f64, d: f64, tol: f64) -> Result<Series> {
    positive("R", r)?;
    positive("d", d)?;
    positive("tol", tol)?;
    let x = d / r;
    // acosh(1 + x) without cancellation for small x
    let beta = (x + (x * (x + 2.0)).sqrt()).ln_1p();
    let sinh_b = beta.sinh();
    let cosh_b = 1.0 + x;
    let q = (-beta).exp();
    let tail1 = q / (1.0 - q);
    let q2 = (-0.5 * beta).exp();
    let tail2 = q2 / (1.0 - q2);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for n in 1..=SERIES_BUDGET {
        let nb = n as f64 * beta;
        let sh = nb.sinh();
        let t1 = 1.0 / sh;
        let t2 = n as f64 * nb.cosh() / (sh * sh);
        s1 += t1;
        s2 += t2;
        if t1 * tail1 <= tol * s1 && nb > 2.0 && t2 * tail2 <= tol * s2 {
            let prefactor = 4.0 * PI * EPS0 * r;
            let ds_dbeta = cosh_b * s1 - sinh_b * s2;
            return Ok(Series {
                capacitance: prefactor * sinh_b * s1,
                derivative: prefactor * ds_dbeta / (r * sinh_b),
            });
        }
    }
    Err(ElectrostaticsError::NotConverged {
        terms: SERIES_BUDGET,
        partial_sum: 4.0 * PI * EPS0 * r * sinh_b * s1,
    })
}

/// Exact sphere-plane capacitance from the image-charge series.
pub fn sphere_plane_capacitance(r: f64, d: f64, tol: f64) -> Result<f64> {
    sphere_plane_series(r, d, tol).map(|s| s.capacitance)
}

/// Electrostatic force −½C′(d)V², positive (attractive) for any physical
/// profile since C decreases with d.
pub fn force_from_capacitance(profile: &CapacitanceProfile, d: f64, v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(ElectrostaticsError::Domain {
            name: "V",
            requirement: "finite",
            value: v,
        });
    }
    Ok(-0.5 * profile.derivative(d)? * v * v)
}

/// PFA force coefficient α = πε0R/d, so that F = αV².
pub fn calibration_alpha(r: f64, d: f64) -> Result<f64> {
    positive("R", r)?;
    positive("d", d)?;
    Ok(PI * EPS0 * r / d)
}

/// Inverse of [`calibration_alpha`]: d = πε0R/α.
pub fn distance_from_alpha(alpha: f64, r: f64) -> Result<f64> {
    positive("alpha", alpha)?;
    positive("R", r)?;
    Ok(PI * EPS0 * r / alpha)
}

/// Mutual repulsion of the two halves of a sphere of radius R carrying
/// charge q: the surface pressure σ²/2ε0 integrated over a hemisphere,
/// q²/(32πε0R²).
pub fn hemisphere_repulsion(q: f64, r: f64) -> Result<f64> {
    positive("R", r)?;
    if !q.is_finite() {
        return Err(ElectrostaticsError::Domain {
            name: "q",
            requirement: "finite",
            value: q,
        });
    }
    Ok(q * q / (32.0 * PI * EPS0 * r * r))
}

/// Geometry description used by the command-line front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "geometry", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    ParallelPlate { area: f64 },
    SpherePlane { radius: f64 },
}

impl Geometry {
    pub fn profile(&self, tol: f64) -> CapacitanceProfile {
        match *self {
            Self::ParallelPlate { area } => CapacitanceProfile::ParallelPlate { area },
            Self::SpherePlane { radius } => CapacitanceProfile::SpherePlane { radius, tol },
        }
    }
}
