//! Weighted linear least squares and a small Levenberg-Marquardt solver.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("design is rank deficient (condition number {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("non-finite value in fit input at index {index}")]
    NonFinite { index: usize },
    #[error("uncertainties must be all positive or all zero (index {index} is {value})")]
    BadSigma { index: usize, value: f64 },
    #[error("Levenberg-Marquardt did not converge in {iterations} iterations (chi2 = {chi2:e})")]
    NotConverged { iterations: usize, chi2: f64 },
}

/// Condition-number ceiling beyond which a design is treated as singular.
const MAX_CONDITION: f64 = 1e12;

/// Converts optional per-point uncertainties into weights `1/σ`.
///
/// All-zero (or absent) uncertainties mean an unweighted fit.
pub fn inverse_sigmas(sigma: Option<&[f64]>, n: usize) -> Result<Vec<f64>, FitError> {
    let Some(sigma) = sigma else {
        return Ok(vec![1.0; n]);
    };
    if sigma.iter().all(|&s| s == 0.0) {
        return Ok(vec![1.0; n]);
    }
    sigma
        .iter()
        .enumerate()
        .map(|(index, &s)| {
            if s.is_finite() && s > 0.0 {
                Ok(1.0 / s)
            } else {
                Err(FitError::BadSigma { index, value: s })
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub params: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub dof: usize,
}

/// Pseudo-inverse of `AᵀA` and the least-squares solution for `A x ≈ b`,
/// with column equilibration for conditioning.
fn solve_scaled(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), FitError> {
    let ncol = a.ncols();
    let scales: Vec<f64> = (0..ncol)
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = a.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(FitError::RankDeficient {
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let utb = u.transpose() * b;
    let mut x = DVector::zeros(ncol);
    let mut cov = DMatrix::zeros(ncol, ncol);
    for k in 0..svd.singular_values.len() {
        let s = svd.singular_values[k];
        let vk = v_t.row(k).transpose();
        x += &vk * (utb[k] / s);
        cov += &vk * vk.transpose() / (s * s);
    }
    for i in 0..ncol {
        x[i] /= scales[i];
        for j in 0..ncol {
            cov[(i, j)] /= scales[i] * scales[j];
        }
    }
    Ok((x, cov))
}

/// Fits `y ≈ design · p` with per-row weights `1/σ`.
///
/// The covariance is `(XᵀWX)⁻¹`, i.e. it assumes the σ are the true
/// uncertainties (no rescaling by the reduced χ²).
pub fn weighted_linear(
    design: &DMatrix<f64>,
    y: &[f64],
    sigma: Option<&[f64]>,
) -> Result<LinearFit, FitError> {
    let n = design.nrows();
    let p = design.ncols();
    if n < p || y.len() != n {
        return Err(FitError::TooFewPoints { got: n.min(y.len()), need: p });
    }
    if let Some(index) = y.iter().position(|v| !v.is_finite()) {
        return Err(FitError::NonFinite { index });
    }
    if let Some(index) = (0..n).find(|&i| design.row(i).iter().any(|v| !v.is_finite())) {
        return Err(FitError::NonFinite { index });
    }
    let w = inverse_sigmas(sigma, n)?;
    let mut a = design.clone();
    let mut b = DVector::from_column_slice(y);
    for i in 0..n {
        a.row_mut(i).scale_mut(w[i]);
        b[i] *= w[i];
    }
    let (x, covariance) = solve_scaled(&a, &b)?;
    let resid = &a * &x - &b;
    Ok(LinearFit {
        params: x.iter().copied().collect(),
        covariance,
        chi2: resid.norm_squared(),
        dof: n - p,
    })
}

/// Problem definition for [`levenberg_marquardt`]. Residuals are expected
/// to be already weighted (`(model - data)/σ`).
pub trait LeastSquaresProblem {
    fn residuals(&self, params: &[f64]) -> Vec<f64>;
    fn jacobian(&self, params: &[f64]) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step lowers χ² by less than this fraction.
    pub ftol: f64,
    /// Stop when every parameter moves by less than `xtol·(|p| + xtol)`.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            ftol: 1e-14,
            xtol: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmFit {
    pub params: Vec<f64>,
    pub covariance: DMatrix<f64>,
    pub chi2: f64,
    pub iterations: usize,
}

fn chi2_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Levenberg-Marquardt with Marquardt's diagonal scaling.
///
/// Each iteration solves `(JᵀJ + λ·diag(JᵀJ)) δ = -Jᵀr`; λ shrinks tenfold
/// after an accepted step and grows tenfold after a rejected one.
pub fn levenberg_marquardt<P: LeastSquaresProblem>(
    problem: &P,
    initial: &[f64],
    opts: LmOptions,
) -> Result<LmFit, FitError> {
    let np = initial.len();
    let mut params = initial.to_vec();
    let mut r = problem.residuals(&params);
    if let Some(index) = r.iter().position(|v| !v.is_finite()) {
        return Err(FitError::NonFinite { index });
    }
    if r.len() < np {
        return Err(FitError::TooFewPoints { got: r.len(), need: np });
    }
    let mut chi2 = chi2_of(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = chi2 == 0.0;
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let j = problem.jacobian(&params);
        let jtj = j.transpose() * &j;
        let rv = DVector::from_column_slice(&r);
        let g = j.transpose() * rv;
        let mut step_taken = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for i in 0..np {
                let d = jtj[(i, i)];
                a[(i, i)] += lambda * if d > 0.0 { d } else { 1.0 };
            }
            let Some(delta) = a.clone().cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(delta.iter()).map(|(p, d)| p + d).collect();
            let rt = problem.residuals(&trial);
            let chi2_t = chi2_of(&rt);
            if chi2_t.is_finite() && chi2_t <= chi2 {
                let small_step = params
                    .iter()
                    .zip(delta.iter())
                    .all(|(p, d)| d.abs() <= opts.xtol * (p.abs() + opts.xtol));
                let small_drop = chi2 - chi2_t <= opts.ftol * chi2;
                params = trial;
                r = rt;
                chi2 = chi2_t;
                lambda = (lambda / 10.0).max(1e-15);
                converged = small_step || small_drop || chi2 == 0.0;
                step_taken = true;
                break;
            }
            lambda *= 10.0;
        }
        if !step_taken {
            // No downhill direction at any damping: we sit at the minimum.
            converged = true;
        }
    }
    if !converged {
        return Err(FitError::NotConverged { iterations, chi2 });
    }
    let j = problem.jacobian(&params);
    let (_, covariance) = solve_scaled(&j, &DVector::zeros(j.nrows()))?;
    Ok(LmFit {
        params,
        covariance,
        chi2,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_exact() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let design = DMatrix::from_fn(4, 2, |i, j| if j == 0 { xs[i] } else { 1.0 });
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let fit = weighted_linear(&design, &y, None).unwrap();
        assert!((fit.params[0] - 2.0).abs() < 1e-13);
        assert!((fit.params[1] + 1.0).abs() < 1e-13);
        assert!(fit.chi2 < 1e-24);
        assert_eq!(fit.dof, 2);
    }

    #[test]
    fn covariance_of_a_mean() {
        let design = DMatrix::from_element(4, 1, 1.0);
        let fit = weighted_linear(&design, &[1.0, 2.0, 3.0, 4.0], Some(&[2.0; 4])).unwrap();
        assert!((fit.params[0] - 2.5).abs() < 1e-14);
        // σ²/n = 4/4
        assert!((fit.covariance[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_detected() {
        let design = DMatrix::from_fn(5, 2, |_, _| 1.0);
        let r = weighted_linear(&design, &[1.0; 5], None);
        assert!(matches!(r, Err(FitError::RankDeficient { .. })));
    }

    #[test]
    fn mixed_sigmas_rejected() {
        assert!(inverse_sigmas(Some(&[1.0, 0.0]), 2).is_err());
        assert_eq!(inverse_sigmas(Some(&[0.0, 0.0]), 2).unwrap(), vec![1.0, 1.0]);
    }

    struct Exponential {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem for Exponential {
        fn residuals(&self, p: &[f64]) -> Vec<f64> {
            self.t
                .iter()
                .zip(&self.y)
                .map(|(t, y)| p[0] * (-p[1] * t).exp() - y)
                .collect()
        }
        fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
            DMatrix::from_fn(self.t.len(), 2, |i, j| {
                let e = (-p[1] * self.t[i]).exp();
                if j == 0 {
                    e
                } else {
                    -p[0] * self.t[i] * e
                }
            })
        }
    }

    #[test]
    fn lm_recovers_exponential() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let y = t.iter().map(|t| 3.0 * (-0.7 * t).exp()).collect();
        let prob = Exponential { t, y };
        let fit = levenberg_marquardt(&prob, &[1.0, 0.1], LmOptions::default()).unwrap();
        assert!((fit.params[0] - 3.0).abs() < 1e-9, "{:?}", fit.params);
        assert!((fit.params[1] - 0.7).abs() < 1e-9);
    }
}
