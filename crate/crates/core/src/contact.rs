//! Distance-dependent minimizing potential and the residual electrostatic
//! force: the V_a(d) = a·ln d + b fit, the contact-potential ODE, the
//! minimized force, the two-capacitor toy model and the residual-force fit.
//!
//! Logarithms are natural with d in meters; b absorbs the unit choice.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::EPS0;
use crate::electrostatics::{CapacitanceProfile, ElectrostaticsError};
use crate::numerics::interp::{distance_step, richardson_derivative, CubicSpline};
use crate::numerics::lsq::{
    inverse_sigmas, levenberg_marquardt, weighted_linear, FitError, LeastSquaresProblem, LmOptions,
};
use crate::numerics::minimize::{brent, MinimizeError};
use crate::numerics::ode::{self, OdeError, OdeNode, OdeOptions};
use crate::table::{read_table, read_table_file, TableError};

use std::f64::consts::PI;

/// Minimum number of force points accepted by [`fit_residual`].
pub const MIN_RESIDUAL_POINTS: usize = 5;
/// Relative spread of V_m below which V1 and V_rms cannot be separated.
pub const IDENTIFIABILITY_SPREAD: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ContactError {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("need at least {need} samples, got {got}")]
    InsufficientData { got: usize, need: usize },
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
    #[error("contact ODE: {0}")]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Electrostatics(#[from] ElectrostaticsError),
    #[error("fit failed: {0}")]
    Fit(#[from] FitError),
    #[error(
        "V_m is constant across the force curve (relative spread {spread:e}); only (V_m + V1)^2 + V_rms^2 is determined"
    )]
    Unidentifiable { spread: f64 },
    #[error("minimization: {0}")]
    Minimize(#[from] MinimizeError),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl ContactError {
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            Self::Ode(_) | Self::Fit(FitError::NotConverged { .. }) | Self::Minimize(MinimizeError::NotConverged { .. })
        ) || matches!(self, Self::Electrostatics(e) if e.is_convergence())
    }
}

type Result<T> = std::result::Result<T, ContactError>;

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ContactError::Domain {
            name,
            requirement: "finite and > 0",
            value,
        })
    }
}

/// A scalar function of distance with a derivative.
pub trait DistanceCurve {
    fn value(&self, d: f64) -> f64;

    /// d/dd of [`value`](Self::value); numerical unless overridden.
    fn slope(&self, d: f64) -> f64 {
        richardson_derivative(|x| self.value(x), d, distance_step(d))
    }
}

impl<F: Fn(f64) -> f64> DistanceCurve for F {
    fn value(&self, d: f64) -> f64 {
        self(d)
    }
}

/// V(d) = a·ln d + b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPotential {
    pub a: f64,
    pub b: f64,
}

impl DistanceCurve for LogPotential {
    fn value(&self, d: f64) -> f64 {
        self.a * d.ln() + self.b
    }

    fn slope(&self, d: f64) -> f64 {
        self.a / d
    }
}

/// Tabulated curve, natural cubic spline in ln d.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    spline: CubicSpline,
}

impl SampledCurve {
    pub fn new(d: &[f64], v: &[f64]) -> Result<Self> {
        if d.len() < 2 || d.len() != v.len() {
            return Err(ContactError::InsufficientData { got: d.len().min(v.len()), need: 2 });
        }
        if d.iter().any(|x| !(x.is_finite() && *x > 0.0)) || d.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ContactError::InvalidSamples("d must be positive and increasing".into()));
        }
        let ld: Vec<f64> = d.iter().map(|x| x.ln()).collect();
        Ok(Self {
            spline: CubicSpline::new(&ld, v),
        })
    }
}

impl DistanceCurve for SampledCurve {
    fn value(&self, d: f64) -> f64 {
        self.spline.eval(d.ln())
    }

    fn slope(&self, d: f64) -> f64 {
        self.spline.slope(d.ln()) / d
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MinimizingPotentialSamples {
    pub d: Vec<f64>,
    pub v_a: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl MinimizingPotentialSamples {
    pub fn validate(&self, need: usize) -> Result<()> {
        let n = self.d.len();
        if n < need {
            return Err(ContactError::InsufficientData { got: n, need });
        }
        if self.v_a.len() != n || self.sigma.as_ref().is_some_and(|s| s.len() != n) {
            return Err(ContactError::InvalidSamples("column lengths differ".into()));
        }
        for i in 0..n {
            if !(self.d[i].is_finite() && self.d[i] > 0.0) || !self.v_a[i].is_finite() {
                return Err(ContactError::InvalidSamples(format!("row {i}: need finite V_a and d > 0")));
            }
            if i > 0 && self.d[i] <= self.d[i - 1] {
                return Err(ContactError::InvalidSamples(format!("row {i}: d must increase strictly")));
            }
        }
        Ok(())
    }

    pub fn curve(&self) -> Result<SampledCurve> {
        self.validate(2)?;
        SampledCurve::new(&self.d, &self.v_a)
    }

    fn from_table(t: crate::table::Table) -> Self {
        Self {
            d: t.column(0),
            v_a: t.column(1),
            sigma: (t.columns.len() > 2).then(|| t.column(2)),
        }
    }

    /// Reads `d_m,V_a_V[,sigma_V]`.
    pub fn read<R: std::io::Read>(reader: R) -> Result<Self> {
        let s = Self::from_table(read_table(reader, &["d_m", "V_a_V"], &["sigma_V"])?);
        s.validate(1)?;
        Ok(s)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let s = Self::from_table(read_table_file(path, &["d_m", "V_a_V"], &["sigma_V"])?);
        s.validate(1)?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    /// Covariance of (a, b), V².
    pub covariance: [[f64; 2]; 2],
    pub chi2: f64,
    pub dof: usize,
}

impl LogFit {
    pub fn potential(&self) -> LogPotential {
        LogPotential { a: self.a, b: self.b }
    }
}

fn cov2(m: &DMatrix<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Weighted least squares of V_a against ln d.
pub fn fit_log_potential(samples: &MinimizingPotentialSamples) -> Result<LogFit> {
    samples.validate(3)?;
    let n = samples.d.len();
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { samples.d[i].ln() } else { 1.0 });
    let fit = weighted_linear(&design, &samples.v_a, samples.sigma.as_deref())?;
    Ok(LogFit {
        a: fit.params[0],
        b: fit.params[1],
        covariance: cov2(&fit.covariance),
        chi2: fit.chi2,
        dof: fit.dof,
    })
}

/// Boundary condition of the contact ODE at the far end.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FarBoundary {
    /// V_c(d_far) = −V_a(d_far). Adds the homogeneous error ∝ C(d_far)/C(d)
    /// whenever V_a + V_c has not settled at d_far.
    #[default]
    Asymptotic,
    /// V_c(d_far) given explicitly.
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactOptions {
    pub far_boundary: FarBoundary,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ContactOptions {
    fn default() -> Self {
        Self {
            far_boundary: FarBoundary::Asymptotic,
            rtol: 1e-9,
            atol: 1e-15,
        }
    }
}

/// V_c(d) on the accepted ODE nodes, cubic Hermite between them.
///
/// The slope at any d is the ODE right-hand side evaluated on the
/// interpolated value, so V_a + V_c and its derivative stay consistent.
pub struct ContactSolution<'a> {
    /// (d, V_c, dV_c/dd), increasing in d.
    nodes: Vec<(f64, f64, f64)>,
    v_a: &'a dyn DistanceCurve,
    profile: &'a CapacitanceProfile,
}

impl std::fmt::Debug for ContactSolution<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContactSolution").field("nodes", &self.nodes).finish()
    }
}

impl ContactSolution<'_> {
    pub fn nodes(&self) -> &[(f64, f64, f64)] {
        &self.nodes
    }

    pub fn range(&self) -> (f64, f64) {
        (self.nodes[0].0, self.nodes[self.nodes.len() - 1].0)
    }

    fn rhs(&self, d: f64, v_c: f64) -> f64 {
        let c = self.profile.capacitance(d).unwrap_or(f64::NAN);
        let dc = self.profile.derivative(d).unwrap_or(f64::NAN);
        -dc / c * (self.v_a.value(d) + v_c)
    }

    /// Residual |V_c′ − rhs|/|rhs| of the interpolant at `d`.
    pub fn ode_residual(&self, d: f64) -> f64 {
        let (v, dv) = self.hermite(d);
        let r = self.rhs(d, v);
        (dv - r).abs() / r.abs().max(f64::MIN_POSITIVE)
    }

    fn hermite(&self, d: f64) -> (f64, f64) {
        let n = self.nodes.len();
        if n == 1 {
            return (self.nodes[0].1, self.nodes[0].2);
        }
        // Hermite in ln d, where the solutions of interest are smooth.
        let i = self.nodes.partition_point(|p| p.0 <= d).clamp(1, n - 1) - 1;
        let (d0, y0, s0) = self.nodes[i];
        let (d1, y1, s1) = self.nodes[i + 1];
        let (x0, x1) = (d0.ln(), d1.ln());
        let (m0, m1) = (s0 * d0, s1 * d1);
        let h = x1 - x0;
        let t = (d.ln() - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let deriv = ((6.0 * t2 - 6.0 * t) * y0 + (-6.0 * t2 + 6.0 * t) * y1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (3.0 * t2 - 2.0 * t) * m1;
        (value, deriv / d)
    }
}

impl DistanceCurve for ContactSolution<'_> {
    fn value(&self, d: f64) -> f64 {
        self.hermite(d).0
    }

    fn slope(&self, d: f64) -> f64 {
        self.rhs(d, self.value(d))
    }
}

/// Integrates dV_c/dd = −(C′/C)(V_a + V_c) from `d_far` inward to `d_near`
/// (in ln d, adaptive RK4). With the default asymptotic boundary `d_far`
/// should be at least 10× the largest distance of interest.
pub fn solve_contact_ode<'a>(
    v_a: &'a dyn DistanceCurve,
    profile: &'a CapacitanceProfile,
    d_far: f64,
    d_near: f64,
    options: ContactOptions,
) -> Result<ContactSolution<'a>> {
    positive("d_near", d_near)?;
    positive("d_far", d_far)?;
    if d_near >= d_far {
        return Err(ContactError::Domain {
            name: "d_far",
            requirement: "> d_near",
            value: d_far,
        });
    }
    profile.capacitance(d_near)?;
    profile.capacitance(d_far)?;
    let v0 = match options.far_boundary {
        FarBoundary::Asymptotic => -v_a.value(d_far),
        FarBoundary::Value(v) => v,
    };
    // In t = ln d: dV_c/dt = d·dV_c/dd.
    let rhs = |t: f64, v: f64| {
        let d = t.exp();
        match (profile.capacitance(d), profile.derivative(d)) {
            (Ok(c), Ok(dc)) => -d * dc / c * (v_a.value(d) + v),
            _ => f64::NAN,
        }
    };
    let opts = OdeOptions {
        rtol: options.rtol,
        atol: options.atol,
        ..OdeOptions::default()
    };
    let nodes: Vec<OdeNode> = ode::solve(rhs, d_far.ln(), v0, d_near.ln(), opts)?;
    let mut out: Vec<(f64, f64, f64)> = nodes
        .iter()
        .map(|n| {
            let d = n.t.exp();
            (d, n.y, n.dy / d)
        })
        .collect();
    out.reverse();
    // Pin the end points exactly.
    out[0].0 = d_near;
    let last = out.len() - 1;
    out[last].0 = d_far;
    Ok(ContactSolution {
        nodes: out,
        v_a,
        profile,
    })
}

/// F = −½ ∂/∂d [C(d)(V_a + V_c)²] = −½C′U² − C·U·U′ with U = V_a + V_c.
/// Same sign convention as the electrostatic force (positive = attractive).
pub fn minimized_force(
    profile: &CapacitanceProfile,
    v_a: &dyn DistanceCurve,
    v_c: &dyn DistanceCurve,
    d: f64,
) -> Result<f64> {
    positive("d", d)?;
    let c = profile.capacitance(d)?;
    let dc = profile.derivative(d)?;
    let u = v_a.value(d) + v_c.value(d);
    let du = v_a.slope(d) + v_c.slope(d);
    Ok(-0.5 * dc * u * u - c * u * du)
}

/// Two parallel-plate capacitors of area A sharing the lower plate: one at
/// gap d with applied V0, one at gap d + Δ with V0 + Vc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyModel {
    /// Force at the given V0 (N, attractive positive).
    pub force: f64,
    /// Minimizing applied potential.
    pub v_m: f64,
    /// Force left at V0 = V_m.
    pub f_res: f64,
    /// The same residual written through V_m: (ε0A/2)V_m²(d² + (d+Δ)²)/d⁴.
    pub f_res_via_vm: f64,
}

fn toy_check(d: f64, delta: f64, area: f64) -> Result<()> {
    positive("d", d)?;
    positive("A", area)?;
    if !(delta >= 0.0) || delta.is_nan() {
        return Err(ContactError::Domain {
            name: "Delta",
            requirement: ">= 0",
            value: delta,
        });
    }
    Ok(())
}

/// F(d, V0) = ½(ε0A)[V0²/d² + (V0 + Vc)²/(d + Δ)²].
pub fn toy_model_force(d: f64, delta: f64, area: f64, v0: f64, vc: f64) -> Result<f64> {
    toy_check(d, delta, area)?;
    let far = d + delta;
    Ok(0.5 * EPS0 * area * (v0 * v0 / (d * d) + (v0 + vc).powi(2) / (far * far)))
}

pub fn toy_model_eval(d: f64, delta: f64, area: f64, v0: f64, vc: f64) -> Result<ToyModel> {
    let force = toy_model_force(d, delta, area, v0, vc)?;
    let (d2, far2) = (d * d, (d + delta).powi(2));
    let v_m = -vc * d2 / (d2 + far2);
    let f_res = 0.5 * EPS0 * area * vc * vc / (d2 + far2);
    let f_res_via_vm = 0.5 * EPS0 * area * v_m * v_m * (d2 + far2) / (d2 * d2);
    Ok(ToyModel {
        force,
        v_m,
        f_res,
        f_res_via_vm,
    })
}

/// Numerical minimizer of the toy force over V0: Brent's method, then
/// three-point parabolic steps on a wide stencil (the force is quadratic in
/// V0, so wide stencils carry no truncation error and beat the √ε limit of
/// value-only minimization).
pub fn toy_model_argmin(d: f64, delta: f64, area: f64, vc: f64) -> Result<f64> {
    toy_check(d, delta, area)?;
    let f = |v: f64| toy_model_force(d, delta, area, v, vc).unwrap_or(f64::INFINITY);
    let width = 2.0 * vc.abs() + 1e-3;
    let mut x = brent(f, -width, width, 1e-12)?.x;
    let h = 0.25 * width;
    for _ in 0..3 {
        let (fm, f0, fp) = (f(x - h), f(x), f(x + h));
        let curvature = fp - 2.0 * f0 + fm;
        if !(curvature > 0.0) {
            break;
        }
        let step = -h * (fp - fm) / (2.0 * curvature);
        x += step;
        if step.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    Ok(x)
}

/// πε0R[(V_m + V1)² + V_rms²]/d. Derived for |V1| ≫ |V_m|.
pub fn residual_force_model(d: f64, v_m: f64, v1: f64, v_rms: f64, r: f64) -> Result<f64> {
    positive("d", d)?;
    positive("R", r)?;
    Ok(PI * EPS0 * r * ((v_m + v1).powi(2) + v_rms * v_rms) / d)
}

/// One point of a force-distance curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceSample {
    pub d: f64,
    pub f: f64,
    /// Uncertainty (N); all zero for an unweighted fit.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualFitResult {
    #[serde(rename = "V1")]
    pub v1: f64,
    #[serde(rename = "V_rms")]
    pub v_rms: f64,
    /// Covariance of (V1, V_rms), V².
    pub covariance: [[f64; 2]; 2],
    /// RMS of the unweighted force residuals (N).
    pub residual_norm: f64,
    /// Weighted χ² at the optimum.
    pub chi2: f64,
    /// Fitted V_rms² before clamping.
    pub v_rms_sq: f64,
    /// Set when the fitted V_rms² was negative and clamped to zero.
    pub clamped: bool,
}

struct ResidualProblem {
    d: Vec<f64>,
    vm: Vec<f64>,
    target: Vec<f64>,
    w: Vec<f64>,
    scale: f64,
    fixed_w: Option<f64>,
}

impl ResidualProblem {
    fn params(&self, p: &[f64]) -> (f64, f64) {
        match self.fixed_w {
            Some(w) => (p[0], w),
            None => (p[0], p[1]),
        }
    }
}

impl LeastSquaresProblem for ResidualProblem {
    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        let (v1, w) = self.params(p);
        (0..self.d.len())
            .map(|i| (self.scale * ((self.vm[i] + v1).powi(2) + w) / self.d[i] - self.target[i]) * self.w[i])
            .collect()
    }

    fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let (v1, _) = self.params(p);
        let cols = if self.fixed_w.is_some() { 1 } else { 2 };
        DMatrix::from_fn(self.d.len(), cols, |i, j| {
            let base = self.scale / self.d[i] * self.w[i];
            if j == 0 {
                2.0 * (self.vm[i] + v1) * base
            } else {
                base
            }
        })
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Fits (V1, V_rms²) of the residual-force model to F − F_casimir.
///
/// Starts from V1 = median(√(F·d/πε0R) − V_m) and V_rms² = the positive part
/// of min(F·d/πε0R − (V_m + V1)²). A negative optimum for V_rms² is clamped
/// to zero (V1 refitted alone) and flagged.
pub fn fit_residual(
    force_curve: &[ForceSample],
    vm_curve: &dyn DistanceCurve,
    r: f64,
    casimir_model: Option<&dyn Fn(f64) -> f64>,
) -> Result<ResidualFitResult> {
    positive("R", r)?;
    let n = force_curve.len();
    if n < MIN_RESIDUAL_POINTS {
        return Err(ContactError::InsufficientData {
            got: n,
            need: MIN_RESIDUAL_POINTS,
        });
    }
    for (i, s) in force_curve.iter().enumerate() {
        if !(s.d.is_finite() && s.d > 0.0 && s.f.is_finite()) {
            return Err(ContactError::InvalidSamples(format!("force point {i}: need finite F and d > 0")));
        }
    }
    let sig: Vec<f64> = force_curve.iter().map(|s| s.sigma).collect();
    let w = inverse_sigmas(Some(&sig), n)?;
    let d: Vec<f64> = force_curve.iter().map(|s| s.d).collect();
    let vm: Vec<f64> = d.iter().map(|&x| vm_curve.value(x)).collect();
    if let Some(i) = vm.iter().position(|v| !v.is_finite()) {
        return Err(ContactError::InvalidSamples(format!("V_m not defined at d = {:e}", d[i])));
    }
    let (lo, hi) = vm.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let size = vm.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let spread = (hi - lo) / size.max(f64::MIN_POSITIVE);
    if spread < IDENTIFIABILITY_SPREAD || size == 0.0 {
        return Err(ContactError::Unidentifiable { spread: if size == 0.0 { 0.0 } else { spread } });
    }
    let target: Vec<f64> = force_curve
        .iter()
        .map(|s| s.f - casimir_model.map_or(0.0, |c| c(s.d)))
        .collect();
    let scale = PI * EPS0 * r;
    let reduced: Vec<f64> = (0..n).map(|i| target[i] * d[i] / scale).collect();
    let v1_0 = median((0..n).map(|i| reduced[i].max(0.0).sqrt() - vm[i]).collect());
    let floor = (0..n)
        .map(|i| reduced[i] - (vm[i] + v1_0).powi(2))
        .fold(f64::INFINITY, f64::min);
    let w0 = floor.max(0.0);

    let mut problem = ResidualProblem {
        d,
        vm,
        target,
        w,
        scale,
        fixed_w: None,
    };
    let opts = LmOptions::default();
    let fit = levenberg_marquardt(&problem, &[v1_0, w0], opts)?;
    let (v1, wsq, cov, chi2, clamped) = if fit.params[1] >= 0.0 {
        (fit.params[0], fit.params[1], fit.covariance, fit.chi2, false)
    } else {
        problem.fixed_w = Some(0.0);
        let refit = levenberg_marquardt(&problem, &[fit.params[0]], opts)?;
        let mut cov = DMatrix::zeros(2, 2);
        cov[(0, 0)] = refit.covariance[(0, 0)];
        cov[(1, 1)] = fit.covariance[(1, 1)];
        (refit.params[0], fit.params[1], cov, refit.chi2, true)
    };
    let v_rms = wsq.max(0.0).sqrt();
    // (V1, W) → (V1, √W); at W = 0 use √σ_W as the V_rms scale.
    let covariance = if v_rms > 0.0 {
        let j = 1.0 / (2.0 * v_rms);
        [[cov[(0, 0)], cov[(0, 1)] * j], [cov[(1, 0)] * j, cov[(1, 1)] * j * j]]
    } else {
        [[cov[(0, 0)], 0.0], [0.0, cov[(1, 1)].max(0.0).sqrt()]]
    };
    problem.fixed_w = None;
    let resid = problem.residuals(&[v1, wsq.max(0.0)]);
    let residual_norm = (resid
        .iter()
        .zip(&problem.w)
        .map(|(r, w)| (r / w).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(ResidualFitResult {
        v1,
        v_rms,
        covariance,
        residual_norm,
        chi2,
        v_rms_sq: wsq,
        clamped,
    })
}

/// Log-log slope of |F| between consecutive points, a diagnostic for the
/// apparent 1/d^m behaviour of measured residuals (returns −m per interval).
pub fn loglog_slopes(d: &[f64], f: &[f64]) -> Vec<f64> {
    d.windows(2)
        .zip(f.windows(2))
        .map(|(dw, fw)| (fw[1].abs() / fw[0].abs()).ln() / (dw[1] / dw[0]).ln())
        .collect()
}
