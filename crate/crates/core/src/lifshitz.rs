//! Lifshitz free energy, pressure and PFA sphere-plane force between two
//! half-spaces across a homogeneous gap.
//!
//! The transverse wavevector integral is written in the variable
//! y = 2κ₃d, κ₃ = √(k⊥² + ε₃ξ²/c²), so every Matsubara term becomes
//! ∫_{y_min}^∞ (…) e^{−y} dy with y_min = 2√ε₃ ξd/c. Reflection
//! coefficients use r_TE = (κ₃ − κ)/(κ₃ + κ) and
//! r_TM = (εκ₃ − ε₃κ)/(εκ₃ + ε₃κ), so an ideal mirror gives (−1, +1).
//!
//! Sign conventions: the energy per area is negative for attracting plates;
//! pressure and force are reported positive when attractive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{C, HBAR, K_B};
use crate::numerics::quad::{integrate_decaying, Panels, QuadError, Tolerance};
use crate::permittivity::{eval_imaginary, PermittivityError, PermittivityModel};

/// Auto mode stops once a term falls below this fraction of the sum.
pub const AUTO_TERM_RATIO: f64 = 1e-9;
/// Largest number of Matsubara terms auto mode will sum.
pub const AUTO_TERM_BUDGET: usize = 100_000;

const PANELS: Panels = Panels {
    first_width: 2.0,
    growth: 1.5,
    max_panels: 200,
};

#[derive(Debug, Error)]
pub enum LifshitzError {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("gap medium must be constant_eps, got {0}")]
    UnsupportedGap(&'static str),
    #[error("Matsubara frequencies need T > 0; use the zero-temperature path")]
    ZeroTemperature,
    #[error("{model} has a divergent static permittivity; its xi = 0 reflection is set by the TE n=0 policy")]
    DivergentStatic { model: &'static str },
    #[error(transparent)]
    Permittivity(#[from] PermittivityError),
    #[error("Matsubara sum not converged after {terms} terms (partial sum {partial_sum:e}, last term {last_term:e})")]
    SumNotConverged {
        terms: usize,
        partial_sum: f64,
        last_term: f64,
    },
    #[error("k-integral failed at xi = {xi:e}: {source}")]
    Quadrature {
        xi: f64,
        #[source]
        source: QuadError,
    },
}

impl LifshitzError {
    pub fn is_convergence(&self) -> bool {
        matches!(self, Self::SumNotConverged { .. } | Self::Quadrature { .. })
    }
}

type Result<T> = std::result::Result<T, LifshitzError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeZeroPolicy {
    /// TE n=0 follows the zero-frequency limit of each model.
    #[default]
    FromModel,
    /// Conducting plates reflect TE at n=0 like ideal mirrors unless their
    /// model already gives a plasma-like limit.
    ForceInclude,
    /// TE n=0 reflection is zero.
    ForceExclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoKeyword {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NMax {
    Fixed(usize),
    Auto(AutoKeyword),
}

impl Default for NMax {
    fn default() -> Self {
        Self::Auto(AutoKeyword::Auto)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Convergence {
    pub n_max: NMax,
    pub kperp_tolerance: f64,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            n_max: NMax::default(),
            kperp_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifshitzProblem {
    pub plate_a: PermittivityModel,
    pub plate_b: PermittivityModel,
    #[serde(default = "PermittivityModel::vacuum")]
    pub gap: PermittivityModel,
    pub d: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default)]
    pub te_zero_policy: TeZeroPolicy,
    #[serde(default)]
    pub convergence: Convergence,
}

impl LifshitzProblem {
    /// Problem with a vacuum gap and default policy/convergence.
    pub fn new(plate_a: PermittivityModel, plate_b: PermittivityModel, d: f64, t: f64) -> Self {
        Self {
            plate_a,
            plate_b,
            gap: PermittivityModel::vacuum(),
            d,
            t,
            te_zero_policy: TeZeroPolicy::default(),
            convergence: Convergence::default(),
        }
    }

    pub fn at_distance(&self, d: f64) -> Self {
        Self { d, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(domain("d", "finite and > 0", self.d));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(domain("T", "finite and >= 0", self.t));
        }
        let tol = self.convergence.kperp_tolerance;
        if !(tol > 0.0 && tol < 0.1) {
            return Err(domain("kperp_tolerance", "in (0, 0.1)", tol));
        }
        gap_eps(&self.gap)?;
        self.plate_a.validate()?;
        self.plate_b.validate()?;
        Ok(())
    }
}

fn domain(name: &'static str, requirement: &'static str, value: f64) -> LifshitzError {
    LifshitzError::Domain {
        name,
        requirement,
        value,
    }
}

fn gap_eps(gap: &PermittivityModel) -> Result<f64> {
    match gap {
        PermittivityModel::ConstantEps { eps } if eps.is_finite() && *eps > 0.0 => Ok(*eps),
        PermittivityModel::ConstantEps { eps } => Err(domain("gap eps", "finite and > 0", *eps)),
        other => Err(LifshitzError::UnsupportedGap(other.name())),
    }
}

/// ξ_n = 2πn·k_bT/ħ for n = 0..=n_max.
pub fn matsubara_frequencies(t: f64, n_max: usize) -> Result<Vec<f64>> {
    if t == 0.0 {
        return Err(LifshitzError::ZeroTemperature);
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(domain("T", "finite and > 0", t));
    }
    let step = 2.0 * std::f64::consts::PI * K_B * t / HBAR;
    Ok((0..=n_max).map(|n| n as f64 * step).collect())
}

/// Mean energy per ħω of a thermal mode, ½·coth(ħω/2k_bT) = N(ω) + ½.
pub fn thermal_weight(omega: f64, t: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(domain("omega", "finite and > 0", omega));
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(domain("T", "finite and > 0", t));
    }
    let x = HBAR * omega / (2.0 * K_B * t);
    Ok(0.5 / x.tanh())
}

// Reflection of one plate in the scaled variables, at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Te {
    Ideal,
    // (y − s)/(y + s), s = √(y² + c2)
    Kappa { c2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tm {
    Ideal,
    // (ρy − s)/(ρy + s), s = √(y² + c2), ρ = ε/ε₃
    Fresnel { c2: f64, rho: f64 },
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Response {
    te: Te,
    tm: Tm,
}

impl Response {
    fn te(&self, y: f64) -> f64 {
        match self.te {
            Te::Ideal => -1.0,
            Te::Kappa { c2 } => {
                if c2.is_infinite() {
                    return -1.0;
                }
                let s = (y * y + c2).sqrt();
                // (y − s)/(y + s) without cancellation
                -c2 / ((y + s) * (y + s))
            }
        }
    }

    fn tm(&self, y: f64) -> f64 {
        match self.tm {
            Tm::Ideal => 1.0,
            Tm::Fresnel { c2, rho } => {
                let s = (y * y + c2).sqrt();
                (rho * y - s) / (rho * y + s)
            }
            Tm::Constant(r) => r,
        }
    }

    fn is_transparent(&self) -> bool {
        self.te == Te::Kappa { c2: 0.0 } && matches!(self.tm, Tm::Constant(r) if r == 0.0)
            || self.te == Te::Kappa { c2: 0.0 } && matches!(self.tm, Tm::Fresnel { c2, rho } if c2 == 0.0 && rho == 1.0)
    }
}

/// Response at ξ > 0 with y_min = 2√ε₃ξd/c.
fn response_finite(eps: f64, eps3: f64, y_min: f64) -> Response {
    if eps.is_infinite() {
        return Response {
            te: Te::Ideal,
            tm: Tm::Ideal,
        };
    }
    let rho = eps / eps3;
    let c2 = (rho - 1.0) * y_min * y_min;
    Response {
        te: Te::Kappa { c2 },
        tm: Tm::Fresnel { c2, rho },
    }
}

/// Response at ξ = 0 under the TE policy; `d` enters through 2dK.
fn response_static(model: &PermittivityModel, eps3: f64, d: f64, policy: TeZeroPolicy) -> Response {
    let z = model.zero_frequency();
    let tm = if z.static_eps.is_infinite() {
        Tm::Ideal
    } else {
        Tm::Constant((z.static_eps - eps3) / (z.static_eps + eps3))
    };
    let model_te = Te::Kappa {
        c2: 4.0 * d * d * z.k2,
    };
    let te = match policy {
        TeZeroPolicy::FromModel => model_te,
        TeZeroPolicy::ForceExclude => Te::Kappa { c2: 0.0 },
        TeZeroPolicy::ForceInclude => {
            if z.is_conducting() && z.k2 == 0.0 {
                Te::Ideal
            } else {
                model_te
            }
        }
    };
    Response { te, tm }
}

/// Fresnel coefficients (r_TE, r_TM) at imaginary frequency ξ and
/// transverse wavevector k⊥. At ξ = 0 only finite static permittivities
/// are accepted; conductors go through the TE n=0 policy instead.
pub fn reflection_coefficients(
    plate: &PermittivityModel,
    gap: &PermittivityModel,
    xi: f64,
    kperp: f64,
) -> Result<(f64, f64)> {
    let eps3 = gap_eps(gap)?;
    if !(kperp.is_finite() && kperp > 0.0) {
        return Err(domain("kperp", "finite and > 0", kperp));
    }
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(domain("xi", "finite and >= 0", xi));
    }
    // With d = 1/2 the scaled variables are the wavevectors themselves.
    let kappa3 = (kperp * kperp + eps3 * (xi / C).powi(2)).sqrt();
    let response = if xi == 0.0 {
        let z = plate.zero_frequency();
        if z.static_eps.is_infinite() {
            return Err(LifshitzError::DivergentStatic { model: plate.name() });
        }
        response_static(plate, eps3, 0.5, TeZeroPolicy::FromModel)
    } else {
        let eps = eval_imaginary(plate, xi)?;
        response_finite(eps, eps3, eps3.sqrt() * xi / C)
    };
    Ok((response.te(kappa3), response.tm(kappa3)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    Energy,
    Pressure,
}

/// ∫_{y_min}^∞ y^p Σ_pol f(r_a r_b e^{−y}) dy for one frequency, with
/// f = ln(1 − x) for the energy (p = 1) and x/(1 − x) for the pressure (p = 2).
fn k_integral(a: Response, b: Response, y_min: f64, quantity: Quantity, rel: f64, xi: f64) -> Result<f64> {
    if a.is_transparent() || b.is_transparent() {
        return Ok(0.0);
    }
    let integrand = |y: f64| {
        let e = (-y).exp();
        let x_te = a.te(y) * b.te(y) * e;
        let x_tm = a.tm(y) * b.tm(y) * e;
        match quantity {
            Quantity::Energy => y * ((-x_te).ln_1p() + (-x_tm).ln_1p()),
            Quantity::Pressure => y * y * (x_te / (1.0 - x_te) + x_tm / (1.0 - x_tm)),
        }
    };
    // |r| ≤ 1 bounds the tail by the ideal-mirror integrand.
    let tail = |hi: f64| {
        let e = (-hi).exp();
        let poly = match quantity {
            Quantity::Energy => hi + 1.0,
            Quantity::Pressure => hi * hi + 2.0 * hi + 2.0,
        };
        2.0 * poly * e / (1.0 - e)
    };
    let tol = Tolerance { rel, abs: 0.0 };
    integrate_decaying(integrand, y_min, PANELS, tol, tail)
        .map(|r| r.value)
        .map_err(|source| LifshitzError::Quadrature { xi, source })
}

/// Outcome of a Matsubara summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summation {
    pub value: f64,
    /// Terms summed (n = 0..terms-1); zero for the T = 0 integral path.
    pub terms: usize,
}

fn evaluate(problem: &LifshitzProblem, quantity: Quantity) -> Result<Summation> {
    problem.validate()?;
    let eps3 = gap_eps(&problem.gap)?;
    let d = problem.d;
    let rel = problem.convergence.kperp_tolerance;
    let prefactor_power = match quantity {
        Quantity::Energy => 2,
        Quantity::Pressure => 3,
    };
    if problem.t == 0.0 {
        return zero_temperature(problem, quantity, eps3);
    }

    let xi_step = 2.0 * std::f64::consts::PI * K_B * problem.t / HBAR;
    let term = |n: usize| -> Result<f64> {
        if n == 0 {
            let a = response_static(&problem.plate_a, eps3, d, problem.te_zero_policy);
            let b = response_static(&problem.plate_b, eps3, d, problem.te_zero_policy);
            return Ok(0.5 * k_integral(a, b, 0.0, quantity, rel, 0.0)?);
        }
        let xi = n as f64 * xi_step;
        let y_min = 2.0 * eps3.sqrt() * xi * d / C;
        let ea = eval_imaginary(&problem.plate_a, xi)?;
        let eb = eval_imaginary(&problem.plate_b, xi)?;
        k_integral(
            response_finite(ea, eps3, y_min),
            response_finite(eb, eps3, y_min),
            y_min,
            quantity,
            rel,
            xi,
        )
    };

    let scale = K_B * problem.t / (8.0 * std::f64::consts::PI * d.powi(prefactor_power));
    let mut sum = 0.0;
    match problem.convergence.n_max {
        NMax::Fixed(n_max) => {
            for n in 0..=n_max {
                sum += term(n)?;
            }
            Ok(Summation {
                value: scale * sum,
                terms: n_max + 1,
            })
        }
        NMax::Auto(_) => {
            let mut last = 0.0;
            for n in 0..AUTO_TERM_BUDGET {
                last = term(n)?;
                sum += last;
                if n >= 1 && last.abs() <= AUTO_TERM_RATIO * sum.abs() {
                    return Ok(Summation {
                        value: scale * sum,
                        terms: n + 1,
                    });
                }
            }
            Err(LifshitzError::SumNotConverged {
                terms: AUTO_TERM_BUDGET,
                partial_sum: scale * sum,
                last_term: scale * last,
            })
        }
    }
}

/// T = 0: the Matsubara sum becomes (ħ/2π)∫dξ; with t = y_min the result is
/// ħc/(32π²√ε₃ d³)·∫₀^∞ dt ∫_t^∞ (…) dy (one more power of d for pressure).
fn zero_temperature(problem: &LifshitzProblem, quantity: Quantity, eps3: f64) -> Result<Summation> {
    let d = problem.d;
    let rel = problem.convergence.kperp_tolerance;
    let inner_rel = (rel * 1e-2).max(1e-13);
    let mut failure: Option<LifshitzError> = None;
    let outer = |t: f64| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        let xi = t * C / (2.0 * eps3.sqrt() * d);
        let value = (|| {
            let ea = eval_imaginary(&problem.plate_a, xi)?;
            let eb = eval_imaginary(&problem.plate_b, xi)?;
            k_integral(
                response_finite(ea, eps3, t),
                response_finite(eb, eps3, t),
                t,
                quantity,
                inner_rel,
                xi,
            )
        })();
        match value {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    // The inner integral is bounded by the ideal-mirror one, whose
    // integral over [T, ∞) is below:
    let tail = |hi: f64| {
        let e = (-hi).exp();
        let poly = match quantity {
            Quantity::Energy => 2.0 * (hi + 2.0),
            Quantity::Pressure => 2.0 * (hi * hi + 4.0 * hi + 6.0),
        };
        poly * e / (1.0 - e)
    };
    let result = integrate_decaying(outer, 0.0, PANELS, Tolerance { rel, abs: 0.0 }, tail);
    if let Some(e) = failure {
        return Err(e);
    }
    let integral = result.map_err(|source| LifshitzError::Quadrature { xi: 0.0, source })?;
    let power = match quantity {
        Quantity::Energy => 3,
        Quantity::Pressure => 4,
    };
    let scale = HBAR * C / (32.0 * std::f64::consts::PI.powi(2) * eps3.sqrt() * d.powi(power));
    Ok(Summation {
        value: scale * integral.value,
        terms: 0,
    })
}

/// Free energy per unit area (J/m²); negative when the plates attract.
pub fn free_energy_per_area(problem: &LifshitzProblem) -> Result<f64> {
    evaluate(problem, Quantity::Energy).map(|s| s.value)
}

/// Free energy with summation diagnostics.
pub fn free_energy_summation(problem: &LifshitzProblem) -> Result<Summation> {
    evaluate(problem, Quantity::Energy)
}

/// Pressure −∂E/∂d reported with attraction positive (N/m²), from the
/// d-derivative of the integrand.
pub fn casimir_pressure(problem: &LifshitzProblem) -> Result<f64> {
    evaluate(problem, Quantity::Pressure).map(|s| s.value)
}

pub fn pressure_summation(problem: &LifshitzProblem) -> Result<Summation> {
    evaluate(problem, Quantity::Pressure)
}

/// PFA sphere-plane force F = 2πR|E|, positive when attractive
/// (i.e. −2πR·E(d) with the energy sign convention above).
pub fn sphere_plane_force(problem: &LifshitzProblem, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(domain("R", "finite and > 0", r));
    }
    Ok(-2.0 * std::f64::consts::PI * r * free_energy_per_area(problem)?)
}

/// First-order plasma correction η = 1 − (16/3)·c/(ω_p d) to the
/// ideal-mirror pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eta {
    pub eta: f64,
    /// False when η < 0, i.e. the expansion is outside its range.
    pub valid: bool,
}

pub fn eta_first_order(omega_p: f64, d: f64) -> Result<Eta> {
    if !(omega_p.is_finite() && omega_p > 0.0) {
        return Err(domain("omega_p", "finite and > 0", omega_p));
    }
    if !(d.is_finite() && d > 0.0) {
        return Err(domain("d", "finite and > 0", d));
    }
    let eta = 1.0 - 16.0 / 3.0 * C / (omega_p * d);
    let valid = eta >= 0.0;
    if !valid {
        log::warn!("eta_first_order: c/(omega_p d) = {:.3e} is outside the first-order range", C / (omega_p * d));
    }
    Ok(Eta { eta, valid })
}

/// True iff ε₁(iξ) > ε_gap(iξ) > ε₂(iξ) at every grid frequency.
pub fn repulsion_condition(
    eps1: &PermittivityModel,
    eps2: &PermittivityModel,
    gap: &PermittivityModel,
    xi_grid: &[f64],
) -> Result<bool> {
    if xi_grid.is_empty() {
        return Err(domain("xi_grid length", "> 0", 0.0));
    }
    let mut all = true;
    for &xi in xi_grid {
        let e1 = eval_imaginary(eps1, xi)?;
        let e2 = eval_imaginary(eps2, xi)?;
        let e3 = eval_imaginary(gap, xi)?;
        all &= e1 > e3 && e3 > e2;
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ideal(d: f64, t: f64) -> LifshitzProblem {
        LifshitzProblem::new(PermittivityModel::PerfectConductor, PermittivityModel::PerfectConductor, d, t)
    }

    fn gold_drude() -> PermittivityModel {
        PermittivityModel::Drude {
            omega_p: 1.37e16,
            gamma: 5.3e13,
        }
    }

    fn gold_plasma() -> PermittivityModel {
        PermittivityModel::Plasma { omega_p: 1.37e16 }
    }

    #[test]
    fn matsubara_spacing() {
        let xs = matsubara_frequencies(300.0, 3).unwrap();
        assert_eq!(xs[0], 0.0);
        let want = 2.0 * PI * K_B * 300.0 / HBAR;
        assert!((xs[1] / want - 1.0).abs() < 1e-15);
        assert!((xs[1] - 2.468e14).abs() < 0.001e14);
        let doubled = matsubara_frequencies(600.0, 3).unwrap();
        for (a, b) in xs.iter().zip(&doubled) {
            assert!((2.0 * a - b).abs() <= 1e-15 * b.abs());
        }
        assert!(matches!(matsubara_frequencies(0.0, 3), Err(LifshitzError::ZeroTemperature)));
    }

    #[test]
    fn thermal_weight_limits() {
        let omega = 2.0 * K_B * 300.0 / HBAR;
        let w = thermal_weight(omega, 300.0).unwrap();
        assert!((w - 0.5 / 1f64.tanh()).abs() < 1e-15);
        assert!((w - 0.6565).abs() < 1e-4);
        assert_eq!(thermal_weight(1e20, 1.0).unwrap(), 0.5);
        let small = 1e6;
        let w = thermal_weight(small, 300.0).unwrap();
        assert!((w / (K_B * 300.0 / (HBAR * small)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reflection_limits() {
        let vac = PermittivityModel::vacuum();
        let (te, tm) = reflection_coefficients(&vac, &vac, 1e14, 1e6).unwrap();
        assert_eq!((te, tm), (0.0, 0.0));
        let (te, tm) = reflection_coefficients(&PermittivityModel::PerfectConductor, &vac, 1e14, 1e6).unwrap();
        assert_eq!((te, tm), (-1.0, 1.0));
        assert!(matches!(
            reflection_coefficients(&gold_drude(), &vac, 0.0, 1e6),
            Err(LifshitzError::DivergentStatic { .. })
        ));
    }

    #[test]
    fn reflection_constant_eps_matches_wavevector_form() {
        // Independent evaluation with κ = √(k² + εξ²/c²) directly.
        let eps = 16.0;
        let (xi, k) = (3.0e14, 2.0e6);
        let k0 = (k * k + (xi / C).powi(2)).sqrt();
        let k1 = (k * k + eps * (xi / C).powi(2)).sqrt();
        let te_ref = (k0 - k1) / (k0 + k1);
        let tm_ref = (eps * k0 - k1) / (eps * k0 + k1);
        let (te, tm) =
            reflection_coefficients(&PermittivityModel::ConstantEps { eps }, &PermittivityModel::vacuum(), xi, k).unwrap();
        assert!((te - te_ref).abs() < 1e-14, "{te} {te_ref}");
        assert!((tm - tm_ref).abs() < 1e-14);
        // Static dielectric: TM is (ε−1)/(ε+1), TE vanishes.
        let (te0, tm0) =
            reflection_coefficients(&PermittivityModel::ConstantEps { eps }, &PermittivityModel::vacuum(), 0.0, k).unwrap();
        assert_eq!(te0, 0.0);
        assert!((tm0 - 15.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn ideal_mirror_energy_and_pressure_at_zero_temperature() {
        let d = 1e-6;
        let e = free_energy_per_area(&ideal(d, 0.0)).unwrap();
        let e_ref = -PI * PI * HBAR * C / (720.0 * d.powi(3));
        assert!((e / e_ref - 1.0).abs() < 1e-7, "{e} {e_ref}");
        assert!((e + 4.34e-10).abs() < 0.01e-10);
        let p = casimir_pressure(&ideal(d, 0.0)).unwrap();
        let p_ref = PI * PI * HBAR * C / (240.0 * d.powi(4));
        assert!((p / p_ref - 1.0).abs() < 1e-7);
        let f = sphere_plane_force(&ideal(d, 0.0), 100e-6).unwrap();
        assert!((f - 2.73e-13).abs() < 0.01e-13);
    }

    #[test]
    fn ideal_mirror_high_temperature_limit() {
        // d·T large: only n = 0 counts, E → −ζ(3) k_bT/(8πd²).
        let (d, t) = (20e-6, 300.0);
        let e = free_energy_per_area(&ideal(d, t)).unwrap();
        let zeta3 = 1.202_056_903_159_594_2;
        let e_ref = -zeta3 * K_B * t / (8.0 * PI * d * d);
        assert!((e / e_ref - 1.0).abs() < 1e-6, "{e} {e_ref}");
    }

    #[test]
    fn identical_media_give_zero() {
        let vac = PermittivityModel::vacuum();
        let mut p = LifshitzProblem::new(vac.clone(), vac.clone(), 1e-6, 300.0);
        assert_eq!(free_energy_per_area(&p).unwrap(), 0.0);
        p.t = 0.0;
        assert_eq!(free_energy_per_area(&p).unwrap(), 0.0);
    }

    #[test]
    fn fixed_n_max_sums_exactly_that_many_terms() {
        let mut p = ideal(1e-6, 300.0);
        p.convergence.n_max = NMax::Fixed(4);
        assert_eq!(free_energy_summation(&p).unwrap().terms, 5);
    }

    #[test]
    fn doubling_n_max_at_convergence_is_stable() {
        let mut p = LifshitzProblem::new(gold_drude(), gold_drude(), 1e-6, 300.0);
        let auto = free_energy_summation(&p).unwrap();
        p.convergence.n_max = NMax::Fixed(2 * auto.terms);
        let doubled = free_energy_per_area(&p).unwrap();
        assert!((doubled / auto.value - 1.0).abs() < p.convergence.kperp_tolerance);
    }

    #[test]
    fn te_zero_policies() {
        let (d, t) = (3e-6, 300.0);
        let mut p = LifshitzProblem::new(gold_drude(), gold_drude(), d, t);
        let from_model = free_energy_per_area(&p).unwrap();
        p.te_zero_policy = TeZeroPolicy::ForceInclude;
        let included = free_energy_per_area(&p).unwrap();
        p.te_zero_policy = TeZeroPolicy::ForceExclude;
        let excluded = free_energy_per_area(&p).unwrap();
        assert_eq!(from_model, excluded);
        assert!(excluded.abs() < included.abs());
        // Plasma keeps its TE n=0 term under FromModel.
        let mut q = LifshitzProblem::new(gold_plasma(), gold_plasma(), d, t);
        let plasma = free_energy_per_area(&q).unwrap();
        q.te_zero_policy = TeZeroPolicy::ForceExclude;
        assert!(free_energy_per_area(&q).unwrap().abs() < plasma.abs());
    }

    #[test]
    fn excluded_ratio_falls_toward_half() {
        let mut prev = 1.0;
        for d in [1e-6, 3e-6, 10e-6] {
            let mut p = ideal(d, 300.0);
            let inc = free_energy_per_area(&p).unwrap();
            p.te_zero_policy = TeZeroPolicy::ForceExclude;
            let exc = free_energy_per_area(&p).unwrap();
            let ratio = exc / inc;
            assert!(ratio < prev && ratio > 0.5, "d={d} ratio={ratio}");
            prev = ratio;
        }
        assert!(prev < 0.51);
    }

    #[test]
    fn pressure_matches_energy_derivative() {
        let p = LifshitzProblem::new(gold_drude(), gold_plasma(), 0.5e-6, 300.0);
        let d = p.d;
        let h = 1e-3 * d;
        let e = |x: f64| free_energy_per_area(&p.at_distance(x)).unwrap();
        let numeric = (e(d + h) - e(d - h)) / (2.0 * h);
        let analytic = casimir_pressure(&p).unwrap();
        assert!((analytic / numeric - 1.0).abs() < 1e-5, "{analytic} {numeric}");
    }

    #[test]
    fn eta_values() {
        assert!((eta_first_order(C / 0.01, 1.0).unwrap().eta - 0.946_666_666_666_666_7).abs() < 1e-12);
        assert!((eta_first_order(C / 0.05, 1.0).unwrap().eta - 0.733_333_333_333_333_3).abs() < 1e-12);
        assert!((eta_first_order(1e16, 1e3).unwrap().eta - 1.0).abs() < 1e-9);
        let bad = eta_first_order(C, 1.0).unwrap();
        assert!(!bad.valid && bad.eta < 0.0);
    }

    #[test]
    fn repulsion_predicate() {
        let grid: Vec<f64> = (0..30).map(|i| 1e13 * 10f64.powf(i as f64 / 10.0)).collect();
        let silica = PermittivityModel::ConstantEps { eps: 2.1 };
        let bromobenzene = PermittivityModel::ConstantEps { eps: 2.4 };
        assert!(repulsion_condition(&gold_drude(), &silica, &bromobenzene, &grid).unwrap());
        assert!(!repulsion_condition(&silica, &silica, &bromobenzene, &grid).unwrap());
        assert!(!repulsion_condition(&gold_drude(), &silica, &PermittivityModel::vacuum(), &grid).unwrap());
        assert!(repulsion_condition(&silica, &silica, &bromobenzene, &[]).is_err());
    }

    #[test]
    fn problem_json_keys() {
        let json = r#"{
            "plate_a": {"model": "drude", "omega_p": 1.37e16, "gamma": 5.3e13},
            "plate_b": {"model": "perfect_conductor"},
            "d": 1e-6, "T": 300,
            "te_zero_policy": "force_exclude",
            "convergence": {"n_max": "auto", "kperp_tolerance": 1e-9}
        }"#;
        let p: LifshitzProblem = serde_json::from_str(json).unwrap();
        assert_eq!(p.gap, PermittivityModel::vacuum());
        assert_eq!(p.te_zero_policy, TeZeroPolicy::ForceExclude);
        let fixed: Convergence = serde_json::from_str(r#"{"n_max": 40}"#).unwrap();
        assert_eq!(fixed.n_max, NMax::Fixed(40));
        assert!(serde_json::from_str::<LifshitzProblem>(r#"{"plate_a":{"model":"perfect_conductor"},"plate_b":{"model":"perfect_conductor"},"d":1,"T":0,"dd":2}"#).is_err());
    }
}
