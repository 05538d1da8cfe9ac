//! Synthetic sphere-plane experiments and the analysis pipeline that
//! recovers (d0, a, b, V1, V_rms) from them.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::constants::EPS0;
use crate::contact::{
    fit_log_potential, fit_residual, residual_force_model, ContactError, DistanceCurve, ForceSample, LogFit,
    LogPotential, MinimizingPotentialSamples, ResidualFitResult,
};
use crate::electrostatics::{force_from_capacitance, CapacitanceProfile, ElectrostaticsError, SERIES_TOL};
use crate::lifshitz::{sphere_plane_force, Convergence, LifshitzError, LifshitzProblem, TeZeroPolicy};
use crate::numerics::lsq::{weighted_linear, FitError};
use crate::patches::{patch_force_sphere_plane, PatchError, PatchSpectrum};
use crate::permittivity::PermittivityModel;
use crate::table::{read_table, TableError};

use std::f64::consts::PI;

pub const DATASET_HEADER: [&str; 4] = ["z_nominal_m", "V_applied_V", "F_N", "sigma_N"];
/// Two-sided 95% normal quantile used for confidence intervals.
pub const Z95: f64 = 1.959963984540054;
const PATCH_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error(transparent)]
    Lifshitz(#[from] LifshitzError),
    #[error(transparent)]
    Electrostatics(#[from] ElectrostaticsError),
    #[error(transparent)]
    Patch(#[from] PatchError),
    #[error("fit failed: {0}")]
    Fit(#[from] FitError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl SimError {
    pub fn is_convergence(&self) -> bool {
        match self {
            Self::Lifshitz(e) => e.is_convergence(),
            Self::Electrostatics(e) => e.is_convergence(),
            Self::Patch(e) => e.is_convergence(),
            Self::Fit(FitError::NotConverged { .. }) => true,
            Self::Contact(e) => e.is_convergence(),
            _ => false,
        }
    }
}

type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactParams {
    pub a: f64,
    pub b: f64,
}

impl ContactParams {
    pub fn potential(&self) -> LogPotential {
        LogPotential { a: self.a, b: self.b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElectrostaticModel {
    /// α = πε0R/d.
    #[default]
    Pfa,
    /// Image-charge sphere-plane series.
    ExactSeries,
}

fn default_true() -> bool {
    true
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub plate_model: PermittivityModel,
    pub sphere_model: PermittivityModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patch_spec: Option<PatchSpectrum>,
    pub contact: ContactParams,
    #[serde(rename = "V1")]
    pub v1: f64,
    /// Omitted means zero; must be zero or omitted when `patch_spec` is set.
    #[serde(rename = "V_rms", default, skip_serializing_if = "Option::is_none")]
    pub v_rms: Option<f64>,
    pub d0: f64,
    pub z_grid: Vec<f64>,
    pub v_sweep: Vec<f64>,
    #[serde(rename = "sigma_F")]
    pub sigma_f: f64,
    /// Extra noise proportional to the minimized-force signal at each position.
    #[serde(rename = "sigma_F_relative", default, skip_serializing_if = "is_zero")]
    pub sigma_f_relative: f64,
    pub seed: u64,
    #[serde(default)]
    pub electrostatic_model: ElectrostaticModel,
    #[serde(default = "default_true")]
    pub include_casimir: bool,
    #[serde(default)]
    pub te_zero_policy: TeZeroPolicy,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SimError::Config(format!("{name} must be finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(SimError::Config(format!("R must be > 0, got {}", self.r)));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return Err(SimError::Config(format!("T must be >= 0, got {}", self.t)));
        }
        for (name, v) in [("contact.a", self.contact.a), ("contact.b", self.contact.b), ("V1", self.v1), ("d0", self.d0)] {
            finite(name, v)?;
        }
        if let Some(v) = self.v_rms {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::Config(format!("V_rms must be >= 0, got {v}")));
            }
            if self.patch_spec.is_some() && v != 0.0 {
                return Err(SimError::Config(
                    "V_rms and patch_spec both describe patch potentials; set V_rms to 0 or omit it".into(),
                ));
            }
        }
        if !(self.sigma_f.is_finite() && self.sigma_f >= 0.0) {
            return Err(SimError::Config(format!("sigma_F must be >= 0, got {}", self.sigma_f)));
        }
        if !(self.sigma_f_relative.is_finite() && self.sigma_f_relative >= 0.0) {
            return Err(SimError::Config(format!(
                "sigma_F_relative must be >= 0, got {}",
                self.sigma_f_relative
            )));
        }
        if self.z_grid.is_empty() {
            return Err(SimError::Config("z_grid is empty".into()));
        }
        for &z in &self.z_grid {
            finite("z_grid entry", z)?;
            if !(z + self.d0 > 0.0) {
                return Err(SimError::Config(format!("z + d0 = {:e} m is not positive", z + self.d0)));
            }
        }
        for &v in &self.v_sweep {
            finite("v_sweep entry", v)?;
        }
        let mut distinct = self.v_sweep.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 5 {
            return Err(SimError::Config(format!("v_sweep needs >= 5 distinct values, got {}", distinct.len())));
        }
        if !(distinct[0] < 0.0 && distinct[distinct.len() - 1] > 0.0) {
            return Err(SimError::Config("v_sweep must contain both signs".into()));
        }
        self.plate_model
            .validate()
            .and_then(|_| self.sphere_model.validate())
            .map_err(|e| SimError::Config(e.to_string()))?;
        if let Some(p) = &self.patch_spec {
            p.validate().map_err(|e| SimError::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    fn effective_v_rms(&self) -> f64 {
        self.v_rms.unwrap_or(0.0)
    }

    fn casimir_problem(&self, d: f64) -> LifshitzProblem {
        LifshitzProblem {
            te_zero_policy: self.te_zero_policy,
            convergence: Convergence::default(),
            ..LifshitzProblem::new(self.plate_model.clone(), self.sphere_model.clone(), d, self.t)
        }
    }
}

/// Noise-free force terms at one position (attractive positive, N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionTruth {
    pub d: f64,
    pub v_m: f64,
    pub residual: f64,
    pub casimir: f64,
    pub patch: f64,
}

impl PositionTruth {
    /// Force at the minimizing potential.
    pub fn minimized(&self) -> f64 {
        self.residual + self.casimir + self.patch
    }
}

pub fn position_truth(config: &ExperimentConfig, z: f64) -> Result<PositionTruth> {
    let d = z + config.d0;
    if !(d > 0.0) {
        return Err(SimError::Config(format!("z + d0 = {d:e} m is not positive")));
    }
    let v_m = config.contact.potential().value(d);
    let residual = residual_force_model(d, v_m, config.v1, config.effective_v_rms(), config.r)?;
    let casimir = if config.include_casimir {
        sphere_plane_force(&config.casimir_problem(d), config.r)?
    } else {
        0.0
    };
    let patch = match &config.patch_spec {
        Some(p) => patch_force_sphere_plane(p, config.r, d, PATCH_TOL)?,
        None => 0.0,
    };
    Ok(PositionTruth {
        d,
        v_m,
        residual,
        casimir,
        patch,
    })
}

/// Noise-free force at applied voltage `v`.
pub fn truth_force(config: &ExperimentConfig, truth: &PositionTruth, v: f64) -> Result<f64> {
    let dv = v - truth.v_m;
    let electrostatic = match config.electrostatic_model {
        ElectrostaticModel::Pfa => PI * EPS0 * config.r * dv * dv / truth.d,
        ElectrostaticModel::ExactSeries => force_from_capacitance(
            &CapacitanceProfile::SpherePlane {
                radius: config.r,
                tol: SERIES_TOL,
            },
            truth.d,
            dv,
        )?,
    };
    Ok(electrostatic + truth.minimized())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub z_nominal: f64,
    pub v_applied: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_sha256: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    pub records: Vec<Record>,
    pub provenance: Option<Provenance>,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Builds the dataset. Record i draws its noise from the ChaCha8 stream i of
/// `seed`, so any record can be regenerated independently.
pub fn simulate_dataset(config: &ExperimentConfig) -> Result<SyntheticDataset> {
    config.validate()?;
    let zs = sorted(&config.z_grid);
    let vs = sorted(&config.v_sweep);
    let mut records = Vec::with_capacity(zs.len() * vs.len());
    for &z in &zs {
        let truth = position_truth(config, z)?;
        let sigma = config.sigma_f + config.sigma_f_relative * truth.minimized().abs();
        for &v in &vs {
            let index = records.len() as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(index);
            let unit: f64 = StandardNormal.sample(&mut rng);
            let f = truth_force(config, &truth, v)? + sigma * unit;
            records.push(Record {
                z_nominal: z,
                v_applied: v,
                f,
                sigma,
            });
        }
    }
    Ok(SyntheticDataset {
        records,
        provenance: Some(Provenance {
            config_sha256: config.hash(),
            seed: config.seed,
        }),
    })
}

impl SyntheticDataset {
    /// CSV with a `# config_sha256=… seed=…` provenance line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        if let Some(p) = &self.provenance {
            writeln!(w, "# config_sha256={} seed={}", p.config_sha256, p.seed)?;
        }
        writeln!(w, "{}", DATASET_HEADER.join(","))?;
        for r in &self.records {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", r.z_nominal, r.v_applied, r.f, r.sigma)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let provenance = text.lines().find_map(|l| {
            let rest = l.trim().strip_prefix('#')?.trim();
            let mut hash = None;
            let mut seed = None;
            for kv in rest.split_whitespace() {
                match kv.split_once('=') {
                    Some(("config_sha256", v)) => hash = Some(v.to_string()),
                    Some(("seed", v)) => seed = v.parse().ok(),
                    _ => {}
                }
            }
            Some(Provenance {
                config_sha256: hash?,
                seed: seed?,
            })
        });
        let table = read_table(text.as_bytes(), &DATASET_HEADER, &[])?;
        let records = table
            .rows
            .iter()
            .map(|r| Record {
                z_nominal: r[0],
                v_applied: r[1],
                f: r[2],
                sigma: r[3],
            })
            .collect();
        Ok(Self { records, provenance })
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Records grouped by nominal position, positions increasing.
    pub fn positions(&self) -> Vec<(f64, Vec<Record>)> {
        let mut recs = self.records.clone();
        recs.sort_by(|a, b| a.z_nominal.total_cmp(&b.z_nominal).then(a.v_applied.total_cmp(&b.v_applied)));
        let mut out: Vec<(f64, Vec<Record>)> = Vec::new();
        for r in recs {
            match out.last_mut() {
                Some((z, group)) if *z == r.z_nominal => group.push(r),
                _ => out.push((r.z_nominal, vec![r])),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolaFit {
    pub alpha: f64,
    #[serde(rename = "V_m")]
    pub v_m: f64,
    #[serde(rename = "F0")]
    pub f0: f64,
    /// Covariance of (α, V_m, F0).
    pub covariance: [[f64; 3]; 3],
    pub chi2: f64,
    pub dof: usize,
}

impl ParabolaFit {
    pub fn sigma_alpha(&self) -> f64 {
        self.covariance[0][0].max(0.0).sqrt()
    }

    pub fn sigma_v_m(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }

    pub fn sigma_f0(&self) -> f64 {
        self.covariance[2][2].max(0.0).sqrt()
    }

    /// 95% confidence interval of V_m.
    pub fn v_m_interval(&self) -> (f64, f64) {
        let h = Z95 * self.sigma_v_m();
        (self.v_m - h, self.v_m + h)
    }
}

fn all_zero(s: &[f64]) -> bool {
    s.iter().all(|&x| x == 0.0)
}

/// Fits F = α(V − V_m)² + F0 through the linear form p2·V² + p1·V + p0.
/// Unweighted fits (all σ zero) scale the covariance by χ²/dof.
pub fn fit_voltage_parabola(sweep: &[Record]) -> Result<ParabolaFit> {
    let mut distinct: Vec<f64> = sweep.iter().map(|r| r.v_applied).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 5 {
        return Err(SimError::Data(format!("parabola fit needs >= 5 distinct voltages, got {}", distinct.len())));
    }
    if !(distinct[0] < 0.0 && distinct[distinct.len() - 1] > 0.0) {
        return Err(SimError::Data("parabola sweep must contain both signs".into()));
    }
    let n = sweep.len();
    let design = DMatrix::from_fn(n, 3, |i, j| sweep[i].v_applied.powi(2 - j as i32));
    let f: Vec<f64> = sweep.iter().map(|r| r.f).collect();
    let sigma: Vec<f64> = sweep.iter().map(|r| r.sigma).collect();
    let fit = weighted_linear(&design, &f, Some(&sigma))?;
    let (p2, p1, p0) = (fit.params[0], fit.params[1], fit.params[2]);
    let mut cov = fit.covariance.clone();
    if all_zero(&sigma) && fit.dof > 0 {
        cov *= fit.chi2 / fit.dof as f64;
    }
    let v_m = -p1 / (2.0 * p2);
    let jac = DMatrix::from_row_slice(
        3,
        3,
        &[
            1.0,
            0.0,
            0.0,
            p1 / (2.0 * p2 * p2),
            -1.0 / (2.0 * p2),
            0.0,
            p1 * p1 / (4.0 * p2 * p2),
            -p1 / (2.0 * p2),
            1.0,
        ],
    );
    let c = &jac * cov * jac.transpose();
    let covariance = [
        [c[(0, 0)], c[(0, 1)], c[(0, 2)]],
        [c[(1, 0)], c[(1, 1)], c[(1, 2)]],
        [c[(2, 0)], c[(2, 1)], c[(2, 2)]],
    ];
    Ok(ParabolaFit {
        alpha: p2,
        v_m,
        f0: p0 - p1 * p1 / (4.0 * p2),
        covariance,
        chi2: fit.chi2,
        dof: fit.dof,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSample {
    pub z: f64,
    pub alpha: f64,
    /// Zero for an unweighted fit.
    pub sigma_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceCalibration {
    pub d0_est: f64,
    pub d0_sigma: f64,
    /// Slope of α⁻¹ against z, 1/(πε0R).
    pub slope: f64,
    pub intercept: f64,
    /// πε0R implied by the slope.
    pub pi_eps0_r_fit: f64,
    /// Fitted over nominal πε0R.
    pub radius_ratio: f64,
    pub chi2: f64,
    pub dof: usize,
}

/// Linear fit α⁻¹ = (z + d0)/(πε0R); d0 = intercept/slope. The slope is
/// left free and compared with the nominal R.
pub fn calibrate_distance(samples: &[AlphaSample], r: f64) -> Result<DistanceCalibration> {
    if !(r.is_finite() && r > 0.0) {
        return Err(SimError::Data(format!("R must be > 0, got {r}")));
    }
    if samples.len() < 3 {
        return Err(SimError::Data(format!("distance calibration needs >= 3 positions, got {}", samples.len())));
    }
    if let Some(s) = samples.iter().find(|s| !(s.alpha > 0.0) || !s.alpha.is_finite()) {
        return Err(SimError::Data(format!("alpha must be > 0 (z = {:e}: {})", s.z, s.alpha)));
    }
    let n = samples.len();
    let y: Vec<f64> = samples.iter().map(|s| 1.0 / s.alpha).collect();
    let sigma: Vec<f64> = samples.iter().map(|s| s.sigma_alpha / (s.alpha * s.alpha)).collect();
    let unweighted = all_zero(&sigma);
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { samples[i].z } else { 1.0 });
    let fit = weighted_linear(&design, &y, Some(&sigma))?;
    let (s, i) = (fit.params[0], fit.params[1]);
    let mut cov = fit.covariance.clone();
    if unweighted && fit.dof > 0 {
        cov *= fit.chi2 / fit.dof as f64;
    }
    let (gi, gs) = (1.0 / s, -i / (s * s));
    let var = gs * gs * cov[(0, 0)] + 2.0 * gs * gi * cov[(0, 1)] + gi * gi * cov[(1, 1)];
    let pi_eps0_r_fit = 1.0 / s;
    Ok(DistanceCalibration {
        d0_est: i / s,
        d0_sigma: var.max(0.0).sqrt(),
        slope: s,
        intercept: i,
        pi_eps0_r_fit,
        radius_ratio: pi_eps0_r_fit / (PI * EPS0 * r),
        chi2: fit.chi2,
        dof: fit.dof,
    })
}

/// Physical model the analysis assumes for the Casimir subtraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisModel {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub plate_model: PermittivityModel,
    pub sphere_model: PermittivityModel,
    #[serde(default = "default_true")]
    pub include_casimir: bool,
    #[serde(default)]
    pub te_zero_policy: TeZeroPolicy,
}

impl AnalysisModel {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        Self {
            r: config.r,
            t: config.t,
            plate_model: config.plate_model.clone(),
            sphere_model: config.sphere_model.clone(),
            include_casimir: config.include_casimir,
            te_zero_policy: config.te_zero_policy,
        }
    }

    fn casimir(&self, d: f64) -> Result<f64> {
        if !self.include_casimir {
            return Ok(0.0);
        }
        let problem = LifshitzProblem {
            te_zero_policy: self.te_zero_policy,
            ..LifshitzProblem::new(self.plate_model.clone(), self.sphere_model.clone(), d, self.t)
        };
        Ok(sphere_plane_force(&problem, self.r)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Parabola,
    Distance,
    LogFit,
    CasimirSubtraction,
    ResidualFit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Parabola => "parabola",
            Self::Distance => "distance",
            Self::LogFit => "log_fit",
            Self::CasimirSubtraction => "casimir_subtraction",
            Self::ResidualFit => "residual_fit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageGoodness {
    pub stage: Stage,
    pub chi2: f64,
    pub dof: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaPoint {
    pub z: f64,
    pub alpha: f64,
    pub sigma_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VmPoint {
    pub d: f64,
    #[serde(rename = "V_m")]
    pub v_m: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcePoint {
    pub d: f64,
    /// Force at V_m from the parabola fit.
    #[serde(rename = "F0")]
    pub f0: f64,
    pub sigma: f64,
    /// Subtracted Casimir force.
    pub casimir: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub d0_est: f64,
    pub d0_sigma: f64,
    pub distance: DistanceCalibration,
    pub alpha_curve: Vec<AlphaPoint>,
    pub vm_curve: Vec<VmPoint>,
    pub log_fit: LogFit,
    pub force_curve: Vec<ForcePoint>,
    pub residual_fit: ResidualFitResult,
    /// Per-stage χ² in execution order.
    pub goodness: Vec<StageGoodness>,
}

/// Whatever finished before a stage failed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PartialCalibration {
    pub parabolas: Vec<(f64, ParabolaFit)>,
    pub distance: Option<DistanceCalibration>,
    pub log_fit: Option<LogFit>,
    pub force_curve: Vec<ForcePoint>,
    pub goodness: Vec<StageGoodness>,
}

#[derive(Debug, Error)]
#[error("analysis stage {stage} failed: {source}")]
pub struct AnalysisError {
    pub stage: Stage,
    #[source]
    pub source: SimError,
    pub partial: Box<PartialCalibration>,
}

impl AnalysisError {
    pub fn is_convergence(&self) -> bool {
        self.source.is_convergence()
    }
}

/// Runs the five stages: per-position parabolas, distance calibration,
/// V_m(d) log fit, Casimir subtraction, residual (V1, V_rms) fit.
///
/// The Casimir-subtraction χ² is that of the subtracted forces against the
/// best-fit residual model; it is what discriminates Casimir models.
pub fn run_analysis(dataset: &SyntheticDataset, model: &AnalysisModel) -> std::result::Result<CalibrationResult, AnalysisError> {
    let mut partial = PartialCalibration::default();
    macro_rules! stage {
        ($stage:expr, $e:expr) => {
            match $e {
                Ok(v) => v,
                Err(source) => {
                    return Err(AnalysisError {
                        stage: $stage,
                        source: source.into(),
                        partial: Box::new(partial),
                    })
                }
            }
        };
    }

    let positions = dataset.positions();
    if positions.len() < 3 {
        stage!(
            Stage::Parabola,
            Err::<(), _>(SimError::Data(format!("need >= 3 positions, got {}", positions.len())))
        );
    }
    let weighted = !all_zero(&dataset.records.iter().map(|r| r.sigma).collect::<Vec<_>>());
    let (mut chi2, mut dof) = (0.0, 0);
    for (z, recs) in &positions {
        let fit = stage!(Stage::Parabola, fit_voltage_parabola(recs));
        chi2 += fit.chi2;
        dof += fit.dof;
        partial.parabolas.push((*z, fit));
    }
    partial.goodness.push(StageGoodness {
        stage: Stage::Parabola,
        chi2,
        dof,
    });
    let sig = |s: f64| if weighted { s } else { 0.0 };

    let alpha_curve: Vec<AlphaPoint> = partial
        .parabolas
        .iter()
        .map(|(z, p)| AlphaPoint {
            z: *z,
            alpha: p.alpha,
            sigma_alpha: p.sigma_alpha(),
        })
        .collect();
    let samples: Vec<AlphaSample> = alpha_curve
        .iter()
        .map(|a| AlphaSample {
            z: a.z,
            alpha: a.alpha,
            sigma_alpha: sig(a.sigma_alpha),
        })
        .collect();
    let distance = stage!(Stage::Distance, calibrate_distance(&samples, model.r));
    partial.goodness.push(StageGoodness {
        stage: Stage::Distance,
        chi2: distance.chi2,
        dof: distance.dof,
    });
    partial.distance = Some(distance.clone());
    let d0 = distance.d0_est;

    let vm_curve: Vec<VmPoint> = partial
        .parabolas
        .iter()
        .map(|(z, p)| VmPoint {
            d: z + d0,
            v_m: p.v_m,
            sigma: p.sigma_v_m(),
        })
        .collect();
    if let Some(p) = vm_curve.iter().find(|p| !(p.d > 0.0)) {
        stage!(
            Stage::LogFit,
            Err::<(), _>(SimError::Data(format!("calibrated distance {:e} m is not positive", p.d)))
        );
    }
    let vm_samples = MinimizingPotentialSamples {
        d: vm_curve.iter().map(|p| p.d).collect(),
        v_a: vm_curve.iter().map(|p| p.v_m).collect(),
        sigma: Some(vm_curve.iter().map(|p| sig(p.sigma)).collect()),
    };
    let log_fit = stage!(Stage::LogFit, fit_log_potential(&vm_samples));
    partial.goodness.push(StageGoodness {
        stage: Stage::LogFit,
        chi2: log_fit.chi2,
        dof: log_fit.dof,
    });
    partial.log_fit = Some(log_fit.clone());

    for ((_, p), vm) in partial.parabolas.iter().zip(&vm_curve) {
        let casimir = stage!(Stage::CasimirSubtraction, model.casimir(vm.d));
        partial.force_curve.push(ForcePoint {
            d: vm.d,
            f0: p.f0,
            sigma: p.sigma_f0(),
            casimir,
        });
    }
    let force_samples: Vec<ForceSample> = partial
        .force_curve
        .iter()
        .map(|p| ForceSample {
            d: p.d,
            f: p.f0 - p.casimir,
            sigma: sig(p.sigma),
        })
        .collect();
    let potential = log_fit.potential();
    let residual_fit = stage!(Stage::ResidualFit, fit_residual(&force_samples, &potential, model.r, None));
    let dof5 = force_samples.len().saturating_sub(2);
    partial.goodness.push(StageGoodness {
        stage: Stage::CasimirSubtraction,
        chi2: residual_fit.chi2,
        dof: dof5,
    });
    partial.goodness.push(StageGoodness {
        stage: Stage::ResidualFit,
        chi2: residual_fit.chi2,
        dof: dof5,
    });

    Ok(CalibrationResult {
        d0_est: d0,
        d0_sigma: distance.d0_sigma,
        distance,
        alpha_curve,
        vm_curve,
        log_fit,
        force_curve: partial.force_curve,
        residual_fit,
        goodness: partial.goodness,
    })
}
