//! `casimir` command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use casimir_core::constants::EPS0;
use casimir_core::contact::{
    fit_log_potential, fit_residual, DistanceCurve, ForceSample, MinimizingPotentialSamples,
};
use casimir_core::electrostatics::{force_from_capacitance, Geometry, SERIES_TOL};
use casimir_core::lifshitz::{casimir_pressure, free_energy_summation, sphere_plane_force, LifshitzProblem};
use casimir_core::patches::{patch_force_sphere_plane, PatchSpectrum};
use casimir_core::screening::{
    apparent_distance_offset, debye_length, screened_energy_per_area, screened_surface_potential,
    SemiconductorPlate,
};
use casimir_core::simkit::{run_analysis, simulate_dataset, AnalysisModel, ExperimentConfig, SyntheticDataset};
use casimir_core::table::{read_table_file, TableError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "casimir", version, about = "Casimir force and electrostatic calibration toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lifshitz energy, pressure and sphere-plane force over a distance grid.
    Force {
        /// LifshitzProblem JSON; its `d` is used when no grid is given.
        config: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Sphere radius (m); adds a PFA sphere-plane force column.
        #[arg(long)]
        radius: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Capacitance, force and α = F/V² for a geometry JSON.
    Electrostatic {
        config: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Applied potential difference (V).
        #[arg(long, default_value_t = 1.0)]
        voltage: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Debye length, surface potential, field energy and distance offset.
    Screening {
        config: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1.0)]
        voltage: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Patch-potential sphere-plane force curve for a spectrum JSON.
    Patch {
        config: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Sphere radius (m).
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Synthetic dataset CSV from an experiment config JSON.
    Simulate {
        config: PathBuf,
        /// Noise seed; overrides the config's `seed`.
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Full calibration analysis of a dataset CSV.
    Analyze {
        /// Dataset CSV (z_nominal_m,V_applied_V,F_N,sigma_N).
        data: PathBuf,
        /// Analysis model JSON (R, T, plate_model, sphere_model, ...).
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit (V1, V_rms) to a residual-force curve.
    FitResidual {
        /// Force CSV (d_m,F_N[,sigma_N]).
        force: PathBuf,
        /// Minimizing-potential CSV (d_m,V_a_V[,sigma_V]).
        #[arg(long)]
        vm: PathBuf,
        /// Sphere radius (m).
        #[arg(long)]
        radius: f64,
        /// V_m(d) from the a·ln d + b fit (default) or a spline through the samples.
        #[arg(long, value_enum, default_value_t = VmInterp::Log)]
        vm_interp: VmInterp,
        /// LifshitzProblem JSON whose sphere-plane force is subtracted first.
        #[arg(long)]
        casimir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Relative tolerance for quadratures and series.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Smallest distance (m).
    #[arg(long)]
    d_min: Option<f64>,
    /// Largest distance (m).
    #[arg(long)]
    d_max: Option<f64>,
    /// Number of log-spaced distances.
    #[arg(long, default_value_t = 50)]
    points: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum VmInterp {
    Log,
    Spline,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::NotConverged(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl From<casimir_core::Error> for CliError {
    fn from(e: casimir_core::Error) -> Self {
        let io = matches!(
            &e,
            casimir_core::Error::Table(TableError::Io { .. })
                | casimir_core::Error::Sim(casimir_core::simkit::SimError::Io(_))
                | casimir_core::Error::Sim(casimir_core::simkit::SimError::Table(TableError::Io { .. }))
                | casimir_core::Error::Contact(casimir_core::contact::ContactError::Table(TableError::Io { .. }))
        );
        if io {
            Self::Io(e.to_string())
        } else if e.is_convergence() {
            Self::NotConverged(e.to_string())
        } else {
            Self::Usage(e.to_string())
        }
    }
}

macro_rules! core_err {
    ($e:expr) => {
        $e.map_err(|e| CliError::from(casimir_core::Error::from(e)))
    };
}

type Result<T> = std::result::Result<T, CliError>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "{}:{}:{}: invalid JSON config: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn log_grid(grid: &GridArgs, fallback: Option<f64>) -> Result<Vec<f64>> {
    let (lo, hi) = match (grid.d_min, grid.d_max, fallback) {
        (Some(a), Some(b), _) => (a, b),
        (Some(a), None, _) | (None, Some(a), _) => return Ok(vec![a]),
        (None, None, Some(d)) => return Ok(vec![d]),
        (None, None, None) => return Err(CliError::Usage("--d-min and --d-max are required".into())),
    };
    if !(lo.is_finite() && lo > 0.0 && hi.is_finite() && hi >= lo) {
        return Err(CliError::Usage(format!("need 0 < d_min <= d_max, got {lo:e}, {hi:e}")));
    }
    if grid.points == 0 || (grid.points == 1 && hi > lo) {
        return Err(CliError::Usage("--points must be >= 2 for a range".into()));
    }
    if grid.points == 1 || hi == lo {
        return Ok(vec![lo]);
    }
    let step = (hi / lo).ln() / (grid.points - 1) as f64;
    Ok((0..grid.points).map(|i| lo * (step * i as f64).exp()).collect())
}

fn check_tol(tol: Option<f64>) -> Result<Option<f64>> {
    match tol {
        Some(t) if !(t.is_finite() && t > 0.0 && t < 1.0) => Err(CliError::Usage(format!("--tol must be in (0, 1), got {t}"))),
        t => Ok(t),
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be > 0, got {v}")))
    }
}

/// Row-oriented numeric table rendered as CSV or as a JSON array of objects.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
    comments: Vec<String>,
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = String::new();
                for c in &self.comments {
                    let _ = writeln!(s, "# {c}");
                }
                let _ = writeln!(s, "{}", self.columns.join(","));
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                    let _ = writeln!(s, "{}", cells.join(","));
                }
                s
            }
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| {
                        self.columns
                            .iter()
                            .zip(r)
                            .map(|(c, v)| (c.to_string(), serde_json::json!(v)))
                            .collect()
                    })
                    .collect();
                to_json(&rows)
            }
        }
    }
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

fn force_cmd(config: &Path, grid: &GridArgs, radius: Option<f64>, common: &Common) -> Result<String> {
    let mut problem: LifshitzProblem = read_json(config)?;
    if let Some(t) = check_tol(common.tol)? {
        problem.convergence.kperp_tolerance = t;
    }
    core_err!(problem.validate())?;
    if let Some(r) = radius {
        check_positive("--radius", r)?;
    }
    let ds = log_grid(grid, Some(problem.d))?;
    let mut columns = vec!["d_m", "energy_J_m2", "pressure_Pa", "matsubara_terms"];
    if radius.is_some() {
        columns.push("force_N");
    }
    let mut rows = Vec::with_capacity(ds.len());
    for d in ds {
        let p = problem.at_distance(d);
        let e = core_err!(free_energy_summation(&p))?;
        let pressure = core_err!(casimir_pressure(&p))?;
        let mut row = vec![d, e.value, pressure, e.terms as f64];
        if let Some(r) = radius {
            row.push(core_err!(sphere_plane_force(&p, r))?);
        }
        rows.push(row);
    }
    Ok(Table {
        columns,
        rows,
        comments: vec![],
    }
    .render(common.format.unwrap_or(Format::Csv)))
}

fn electrostatic_cmd(config: &Path, grid: &GridArgs, voltage: f64, common: &Common) -> Result<String> {
    let geometry: Geometry = read_json(config)?;
    match geometry {
        Geometry::ParallelPlate { area: x } | Geometry::SpherePlane { radius: x } => check_positive("geometry size", x)?,
    }
    if !voltage.is_finite() || voltage == 0.0 {
        return Err(CliError::Usage(format!("--voltage must be finite and non-zero, got {voltage}")));
    }
    let tol = check_tol(common.tol)?.unwrap_or(SERIES_TOL);
    let profile = geometry.profile(tol);
    let ds = log_grid(grid, None)?;
    let mut rows = Vec::with_capacity(ds.len());
    for d in ds {
        let c = core_err!(profile.capacitance(d))?;
        let f = core_err!(force_from_capacitance(&profile, d, voltage))?;
        rows.push(vec![d, c, f, f / (voltage * voltage)]);
    }
    Ok(Table {
        columns: vec!["d_m", "C_F", "F_N", "alpha_N_V2"],
        rows,
        comments: vec![],
    }
    .render(common.format.unwrap_or(Format::Csv)))
}

#[derive(Serialize)]
struct ScreeningReport {
    lambda: f64,
    offset: casimir_core::screening::DistanceOffset,
    curve: Vec<ScreeningRow>,
}

#[derive(Serialize)]
struct ScreeningRow {
    d: f64,
    #[serde(rename = "V_s")]
    v_s: f64,
    energy: f64,
}

fn screening_cmd(config: &Path, grid: &GridArgs, voltage: f64, common: &Common) -> Result<String> {
    let plate: SemiconductorPlate = read_json(config)?;
    let lambda = core_err!(debye_length(&plate))?;
    let ds = log_grid(grid, None)?;
    let (lo, hi) = (ds[0], ds[ds.len() - 1]);
    let offset = if hi > lo {
        core_err!(apparent_distance_offset(lambda, plate.eps_static, (lo, hi)))?
    } else {
        core_err!(apparent_distance_offset(lambda, plate.eps_static, (lo, 10.0 * lo)))?
    };
    let mut curve = Vec::with_capacity(ds.len());
    for d in ds {
        curve.push(ScreeningRow {
            d,
            v_s: core_err!(screened_surface_potential(voltage, d, lambda, plate.eps_static))?,
            energy: core_err!(screened_energy_per_area(voltage, d, lambda, plate.eps_static))?,
        });
    }
    Ok(match common.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&ScreeningReport { lambda, offset, curve }),
        Format::Csv => Table {
            columns: vec!["d_m", "V_s_V", "E_J_m2"],
            rows: curve.iter().map(|r| vec![r.d, r.v_s, r.energy]).collect(),
            comments: vec![format!(
                "lambda_m={:.16e} delta_m={:.16e} three_lambda_over_eps_m={:.16e} min_y={:.16e}",
                lambda, offset.delta_total, offset.three_lambda_over_eps, offset.min_y
            )],
        }
        .render(Format::Csv),
    })
}

fn patch_cmd(config: &Path, grid: &GridArgs, radius: f64, common: &Common) -> Result<String> {
    let spec: PatchSpectrum = read_json(config)?;
    core_err!(spec.validate())?;
    check_positive("--radius", radius)?;
    let tol = check_tol(common.tol)?.unwrap_or(1e-8);
    let ds = log_grid(grid, None)?;
    let mut rows = Vec::with_capacity(ds.len());
    for d in ds {
        let f = core_err!(patch_force_sphere_plane(&spec, radius, d, tol))?;
        rows.push(vec![d, f, f * d / (std::f64::consts::PI * EPS0 * radius)]);
    }
    Ok(Table {
        columns: vec!["d_m", "F_N", "F_d_over_pi_eps0_R_V2"],
        rows,
        comments: vec![],
    }
    .render(common.format.unwrap_or(Format::Csv)))
}

fn simulate_cmd(config: &Path, seed: u64, common: &Common) -> Result<String> {
    let mut cfg: ExperimentConfig = read_json(config)?;
    cfg.seed = seed;
    core_err!(cfg.validate())?;
    let data = core_err!(simulate_dataset(&cfg))?;
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            data.write_csv(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
            Ok(String::from_utf8(buf).expect("ascii csv"))
        }
        Format::Json => Ok(to_json(&data)),
    }
}

fn analyze_cmd(data: &Path, model: &Path, common: &Common) -> Result<String> {
    let model: AnalysisModel = read_json(model)?;
    check_positive("R", model.r)?;
    let dataset = core_err!(SyntheticDataset::read_file(data))?;
    let result = core_err!(run_analysis(&dataset, &model))?;
    if common.format == Some(Format::Csv) {
        return Err(CliError::Usage("analyze writes JSON only".into()));
    }
    Ok(to_json(&result))
}

fn fit_residual_cmd(
    force: &Path,
    vm: &Path,
    radius: f64,
    interp: VmInterp,
    casimir: Option<&Path>,
    common: &Common,
) -> Result<String> {
    if common.format == Some(Format::Csv) {
        return Err(CliError::Usage("fit-residual writes JSON only".into()));
    }
    check_positive("--radius", radius)?;
    let casimir_problem: Option<LifshitzProblem> = casimir.map(read_json).transpose()?;
    if let Some(p) = &casimir_problem {
        core_err!(p.validate())?;
    }
    let table = core_err!(read_table_file(force, &["d_m", "F_N"], &["sigma_N"]))?;
    let samples: Vec<ForceSample> = table
        .rows
        .iter()
        .map(|r| ForceSample {
            d: r[0],
            f: r[1],
            sigma: r.get(2).copied().unwrap_or(0.0),
        })
        .collect();
    let vm_samples = core_err!(MinimizingPotentialSamples::read_file(vm))?;
    let curve: Box<dyn DistanceCurve> = match interp {
        VmInterp::Log => Box::new(core_err!(fit_log_potential(&vm_samples))?.potential()),
        VmInterp::Spline => Box::new(core_err!(vm_samples.curve())?),
    };
    let casimir_values: Option<Vec<(f64, f64)>> = match &casimir_problem {
        Some(p) => Some(
            samples
                .iter()
                .map(|s| core_err!(sphere_plane_force(&p.at_distance(s.d), radius)).map(|f| (s.d, f)))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let lookup = |d: f64| {
        casimir_values
            .as_ref()
            .and_then(|v| v.iter().find(|(x, _)| *x == d).map(|(_, f)| *f))
            .unwrap_or(0.0)
    };
    let result = core_err!(fit_residual(
        &samples,
        curve.as_ref(),
        radius,
        casimir_values.as_ref().map(|_| &lookup as &dyn Fn(f64) -> f64)
    ))?;
    Ok(to_json(&result))
}

fn dispatch(cli: Cli) -> Result<()> {
    let (text, common) = match &cli.command {
        Command::Force {
            config,
            grid,
            radius,
            common,
        } => (force_cmd(config, grid, *radius, common)?, common),
        Command::Electrostatic {
            config,
            grid,
            voltage,
            common,
        } => (electrostatic_cmd(config, grid, *voltage, common)?, common),
        Command::Screening {
            config,
            grid,
            voltage,
            common,
        } => (screening_cmd(config, grid, *voltage, common)?, common),
        Command::Patch {
            config,
            grid,
            radius,
            common,
        } => (patch_cmd(config, grid, *radius, common)?, common),
        Command::Simulate { config, seed, common } => (simulate_cmd(config, *seed, common)?, common),
        Command::Analyze { data, model, common } => (analyze_cmd(data, model, common)?, common),
        Command::FitResidual {
            force,
            vm,
            radius,
            vm_interp,
            casimir,
            common,
        } => (
            fit_residual_cmd(force, vm, *radius, *vm_interp, casimir.as_deref(), common)?,
            common,
        ),
    };
    emit(common, &text)
}

/// Parses `argv` and runs the subcommand; returns the process exit code.
fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
