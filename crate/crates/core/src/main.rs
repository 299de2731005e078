//! Command-line surface: simulate coherence curves, run the two-emitter
//! interference model, fit lineshape/saturation/decay data, and emit sweep
//! and yield-planning tables.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

// `!(x > 0.0)`-style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use tpqi::curve::{CorrelationCurve, TauGrid};
use tpqi::emitter::EmitterParams;
use tpqi::fitting::{fit, FitProblem};
use tpqi::g2model::{BunchingEnvelope, MeasuredG2Model};
use tpqi::hom::{self, Detuning, HomConfig};
use tpqi::irf::IrfParams;
use tpqi::lineshape::{
    decay_intensity, lorentzian, saturation_intensity, voigt, DecayModelParams,
    LineshapeParams, SaturationParams,
};
use tpqi::pair_yield::{self, PairConvention, YieldConfig};
use tpqi::{bloch, tls, units};

// --- configuration ---------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmitterConfig {
    name: String,
    gamma_mhz_over_2pi: Option<f64>,
    gamma_per_ns: Option<f64>,
    omega_ratio: f64,
    #[serde(default)]
    sigma_diffusion_mhz_over_2pi: f64,
    #[serde(default)]
    impurity: f64,
    bunching: Option<BunchingConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BunchingConfig {
    amplitude: f64,
    timescale_ns: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HomSection {
    weight_a: f64,
    weight_b: f64,
    g2zero_a: f64,
    g2zero_b: f64,
    r_constant: Option<f64>,
    #[serde(default)]
    delta_omega_mhz_over_2pi: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IrfSection {
    fwhm_ps: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    tau_max_ns: f64,
    tau_step_ps: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitSection {
    initial: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    fixed: Vec<String>,
    #[serde(default)]
    bounds: Option<serde_json::Map<String, serde_json::Value>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct YieldSection {
    #[serde(default = "default_sigma_nm")]
    sigma_nm: f64,
    #[serde(default = "default_center_nm")]
    center_nm: f64,
    area_um2: f64,
    density_per_um2: f64,
    #[serde(default = "default_penalty")]
    penalty: f64,
    #[serde(default)]
    convention: PairConvention,
    delta_lambda_axis_nm: Vec<f64>,
    density_axis_per_um2: Vec<f64>,
}

fn default_sigma_nm() -> f64 {
    15.0
}
fn default_center_nm() -> f64 {
    930.0
}
fn default_penalty() -> f64 {
    0.5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    gamma_min_mhz_over_2pi: f64,
    gamma_max_mhz_over_2pi: f64,
    points: usize,
    #[serde(default = "default_omega_ratio")]
    omega_ratio: f64,
}

fn default_omega_ratio() -> f64 {
    0.3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    path: Option<String>,
    #[serde(default = "default_format")]
    format: String,
}

fn default_format() -> String {
    "both".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    emitters: Vec<EmitterConfig>,
    hom: Option<HomSection>,
    irf: Option<IrfSection>,
    grid: Option<GridSection>,
    fit: Option<FitSection>,
    #[serde(rename = "yield")]
    yield_section: Option<YieldSection>,
    irf_sweep: Option<SweepSection>,
    output: Option<OutputSection>,
}

impl RunConfig {
    /// Semantic validation; returns JSON-pointer-style paths for violations.
    fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        for (i, e) in self.emitters.iter().enumerate() {
            let base = format!("/emitters/{i}");
            match (e.gamma_mhz_over_2pi, e.gamma_per_ns) {
                (None, None) => errs.push(format!(
                    "{base}: one of gamma_mhz_over_2pi or gamma_per_ns is required"
                )),
                (Some(_), Some(_)) => errs.push(format!(
                    "{base}: gamma_mhz_over_2pi and gamma_per_ns are mutually exclusive"
                )),
                (Some(g), None) | (None, Some(g)) if !(g > 0.0) => {
                    errs.push(format!("{base}: decay rate must be > 0, got {g}"))
                }
                _ => {}
            }
            if e.omega_ratio < 0.0 {
                errs.push(format!("{base}/omega_ratio: must be >= 0"));
            }
            if !(0.0..1.0).contains(&e.impurity) {
                errs.push(format!("{base}/impurity: must be in [0, 1)"));
            }
            if e.sigma_diffusion_mhz_over_2pi < 0.0 {
                errs.push(format!("{base}/sigma_diffusion_mhz_over_2pi: must be >= 0"));
            }
            if let Some(b) = &e.bunching {
                if b.amplitude < 0.0 {
                    errs.push(format!("{base}/bunching/amplitude: must be >= 0"));
                }
                if !(b.timescale_ns > 0.0) {
                    errs.push(format!("{base}/bunching/timescale_ns: must be > 0"));
                }
            }
        }
        if let Some(h) = &self.hom {
            if (h.weight_a + h.weight_b - 1.0).abs() > 1e-9 {
                errs.push("/hom/weight_a: weights must sum to 1".into());
            }
            for (name, v) in [("g2zero_a", h.g2zero_a), ("g2zero_b", h.g2zero_b)] {
                if !(0.0..1.0).contains(&v) {
                    errs.push(format!("/hom/{name}: must be in [0, 1)"));
                }
            }
            if let Some(r) = h.r_constant {
                if !(r > 0.0) {
                    errs.push("/hom/r_constant: must be > 0".into());
                }
            }
        }
        if let Some(irf) = &self.irf {
            if irf.fwhm_ps < 0.0 {
                errs.push("/irf/fwhm_ps: must be >= 0".into());
            }
        }
        if let Some(g) = &self.grid {
            if !(g.tau_max_ns > 0.0) {
                errs.push("/grid/tau_max_ns: must be > 0".into());
            }
            if !(g.tau_step_ps > 0.0) {
                errs.push("/grid/tau_step_ps: must be > 0".into());
            }
        }
        if let Some(s) = &self.irf_sweep {
            if s.gamma_max_mhz_over_2pi <= s.gamma_min_mhz_over_2pi {
                errs.push("/irf_sweep/gamma_max_mhz_over_2pi: must exceed the minimum".into());
            }
            if s.points < 2 {
                errs.push("/irf_sweep/points: must be >= 2".into());
            }
        }
        if let Some(o) = &self.output {
            if o.format != "csv" && o.format != "json" && o.format != "both" {
                errs.push("/output/format: must be one of csv, json, both".into());
            }
        }
        errs
    }

    fn emitter_params(&self, i: usize) -> Result<EmitterParams, CliError> {
        let e = &self.emitters[i];
        let p = match (e.gamma_mhz_over_2pi, e.gamma_per_ns) {
            (Some(mhz), None) => EmitterParams::from_linewidth_mhz(mhz, e.omega_ratio),
            (None, Some(ns)) => EmitterParams::from_decay_ns_inv(ns, e.omega_ratio),
            _ => unreachable!("validated"),
        }
        .and_then(|p| p.with_diffusion_mhz(e.sigma_diffusion_mhz_over_2pi))
        .and_then(|p| p.with_impurity(e.impurity))
        .map_err(|err| CliError::Config(format!("/emitters/{i}: {err}")))?;
        Ok(p)
    }

    fn irf(&self) -> Result<IrfParams, CliError> {
        match &self.irf {
            Some(s) => IrfParams::from_fwhm_ps(s.fwhm_ps)
                .map_err(|e| CliError::Config(format!("/irf: {e}"))),
            None => Ok(IrfParams::none()),
        }
    }

    fn grid_symmetric(&self) -> Result<TauGrid, CliError> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| CliError::Config("/grid: section is required".into()))?;
        TauGrid::symmetric(g.tau_max_ns * 1e-9, g.tau_step_ps * 1e-12)
            .map_err(|e| CliError::Config(format!("/grid: {e}")))
    }

    fn grid_from_zero(&self) -> Result<TauGrid, CliError> {
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| CliError::Config("/grid: section is required".into()))?;
        TauGrid::from_zero(g.tau_max_ns * 1e-9, g.tau_step_ps * 1e-12)
            .map_err(|e| CliError::Config(format!("/grid: {e}")))
    }
}

// --- CLI -------------------------------------------------------------------

#[derive(Parser)]
#[command(name = "tpqi", version, about = "Photon-statistics models for two resonantly driven quantum emitters")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// RNG seed for Monte Carlo paths.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// First-order coherence |g1(tau)| per configured emitter.
    G1 {
        /// Also run the Bloch-equation oracle and emit a residual column.
        #[arg(long)]
        oracle: bool,
    },
    /// Measured-model second-order correlation per configured emitter.
    G2 {
        /// Also run the Bloch-equation oracle against the ideal g2 and emit
        /// a residual column.
        #[arg(long)]
        oracle: bool,
    },
    /// Cross/co-polarized coincidence correlations and visibility.
    Hom {
        /// Ensemble-average over a Gaussian mutual detuning of this width
        /// (sigma/2pi, MHz) instead of using the fixed detuning.
        #[arg(long)]
        ensemble: Option<f64>,
        /// Cross-check the analytic ensemble average with this many Monte
        /// Carlo samples (seeded via --seed).
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// Weighted nonlinear least-squares fit of a named model to CSV data.
    Fit {
        /// Model: lorentzian | voigt | saturation | decay.
        model: String,
        /// Data CSV with columns x,y and optional sigma_y.
        #[arg(long)]
        data: PathBuf,
    },
    /// Expected resonant-pair counts over (tuning range, density).
    YieldMap,
    /// Jitter-limited g2(0) versus decay rate.
    IrfSweep,
}

enum CliError {
    Config(String),
    Numeric(String),
}

impl From<tpqi::Error> for CliError {
    fn from(e: tpqi::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let errs = config.validate();
    if !errs.is_empty() {
        return Err(CliError::Config(errs.join("; ")));
    }
    Ok(config)
}

fn out_dir(cli: &Cli, config: &RunConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| {
            config
                .output
                .as_ref()
                .and_then(|o| o.path.as_ref())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn formats(config: &RunConfig) -> (bool, bool) {
    let f = config
        .output
        .as_ref()
        .map(|o| o.format.as_str())
        .unwrap_or("both");
    match f {
        "json" => (false, true),
        "csv" => (true, false),
        _ => (true, true),
    }
}

/// Staged output: everything is computed first, then written via temp files
/// and atomic renames, so errors leave no partial files behind.
struct OutputSet {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    fn new(dir: PathBuf) -> Self {
        OutputSet { dir, files: Vec::new() }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn add_curve(&mut self, stem: &str, curve: &CorrelationCurve, csv: bool, json: bool) {
        if csv {
            self.add(&format!("{stem}.csv"), curve.to_csv_string().into_bytes());
        }
        if json {
            let s = serde_json::to_string_pretty(curve).expect("curve serializes");
            self.add(&format!("{stem}.json"), s.into_bytes());
        }
    }

    fn commit(self) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Config(format!("{}: {e}", self.dir.display())))?;
        for (name, bytes) in self.files {
            let target = self.dir.join(&name);
            let tmp = self.dir.join(format!(".{name}.tmp"));
            fs::write(&tmp, &bytes)
                .map_err(|e| CliError::Numeric(format!("{}: {e}", tmp.display())))?;
            fs::rename(&tmp, &target)
                .map_err(|e| CliError::Numeric(format!("{}: {e}", target.display())))?;
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::G1 { oracle } => cmd_g1(cli, *oracle),
        Command::G2 { oracle } => cmd_g2(cli, *oracle),
        Command::Hom { ensemble, mc_samples } => cmd_hom(cli, *ensemble, *mc_samples),
        Command::Fit { model, data } => cmd_fit(cli, model, data),
        Command::YieldMap => cmd_yield_map(cli),
        Command::IrfSweep => cmd_irf_sweep(cli),
    }
}

fn csv_with_residual(curve: &CorrelationCurve, residual: &[f64]) -> Vec<u8> {
    let mut s = String::from("tau_s,value,oracle_residual\n");
    for (i, (v, r)) in curve.values.iter().zip(residual).enumerate() {
        s.push_str(&format!("{:.12e},{:.12e},{:.6e}\n", curve.tau(i), v, r));
    }
    s.into_bytes()
}

fn require_emitters(config: &RunConfig) -> Result<(), CliError> {
    if config.emitters.is_empty() {
        return Err(CliError::Config(
            "/emitters: at least one emitter is required".into(),
        ));
    }
    Ok(())
}

fn cmd_g1(cli: &Cli, oracle: bool) -> Result<(), CliError> {
    let config = load_config(cli)?;
    require_emitters(&config)?;
    let grid = config.grid_from_zero()?;
    let (csv, json) = formats(&config);
    let mut out = OutputSet::new(out_dir(cli, &config));

    for i in 0..config.emitters.len() {
        let name = config.emitters[i].name.clone();
        let params = config.emitter_params(i)?;
        let curve = tls::g1_curve(&params, grid)?;
        if oracle {
            let (oracle_g1, _) = bloch::bloch_oracle(&params, grid)?;
            let residual: Vec<f64> = curve
                .values
                .iter()
                .zip(&oracle_g1.values)
                .map(|(a, b)| a - b)
                .collect();
            let max = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            println!("g1[{name}]: max oracle residual {max:.3e}");
            out.add(&format!("g1_{name}.csv"), csv_with_residual(&curve, &residual));
            if json {
                let s = serde_json::to_string_pretty(&curve).expect("curve serializes");
                out.add(&format!("g1_{name}.json"), s.into_bytes());
            }
        } else {
            out.add_curve(&format!("g1_{name}"), &curve, csv, json);
        }
    }
    out.commit()
}

fn cmd_g2(cli: &Cli, oracle: bool) -> Result<(), CliError> {
    let config = load_config(cli)?;
    require_emitters(&config)?;
    let grid = config.grid_symmetric()?;
    let irf = config.irf()?;
    let (csv, json) = formats(&config);
    let mut out = OutputSet::new(out_dir(cli, &config));

    for i in 0..config.emitters.len() {
        let name = config.emitters[i].name.clone();
        let params = config.emitter_params(i)?;
        let bunching = match &config.emitters[i].bunching {
            Some(b) => Some(
                BunchingEnvelope::new(b.amplitude, b.timescale_ns * 1e-9)
                    .map_err(|e| CliError::Config(format!("/emitters/{i}/bunching: {e}")))?,
            ),
            None => None,
        };
        let model = MeasuredG2Model { emitter: params, bunching, irf };
        let curve = tpqi::g2model::g2_measured(&model, grid)?;
        if oracle {
            // residual between the ideal closed-form g2 and the Bloch oracle,
            // mirrored onto the symmetric grid
            let half = TauGrid {
                start: 0.0,
                step: grid.step,
                n: grid.n.div_ceil(2),
            };
            let (_, oracle_g2) = bloch::bloch_oracle(&params, half)?;
            let center = (grid.n - 1) / 2;
            let residual: Vec<f64> = (0..grid.n)
                .map(|j| {
                    let k = j.abs_diff(center);
                    tls::g2_tls(&params, half.tau(k)) - oracle_g2.values[k]
                })
                .collect();
            let max = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            println!("g2[{name}]: max oracle residual {max:.3e}");
            out.add(&format!("g2_{name}.csv"), csv_with_residual(&curve, &residual));
            if json {
                let s = serde_json::to_string_pretty(&curve).expect("curve serializes");
                out.add(&format!("g2_{name}.json"), s.into_bytes());
            }
        } else {
            out.add_curve(&format!("g2_{name}"), &curve, csv, json);
        }
    }
    out.commit()
}

#[derive(Serialize)]
struct HomSummary {
    r: f64,
    v_peak: f64,
    g2_parallel_zero: f64,
    g2_cross_zero: f64,
    ensemble_sigma_mhz_over_2pi: Option<f64>,
}

fn cmd_hom(cli: &Cli, ensemble: Option<f64>, mc_samples: Option<usize>) -> Result<(), CliError> {
    let config = load_config(cli)?;
    if config.emitters.len() != 2 {
        return Err(CliError::Config(
            "/emitters: the hom command needs exactly two emitters".into(),
        ));
    }
    let h = config
        .hom
        .as_ref()
        .ok_or_else(|| CliError::Config("/hom: section is required".into()))?;
    let grid = config.grid_symmetric()?;
    let (csv, json) = formats(&config);

    let a = config.emitter_params(0)?;
    let b = config.emitter_params(1)?;
    let delta_omega = units::mhz_to_angular(h.delta_omega_mhz_over_2pi);
    let detuning = match ensemble {
        Some(sigma_mhz) => Detuning::GaussianEnsemble(units::mhz_to_angular(sigma_mhz)),
        None => Detuning::Fixed(delta_omega),
    };
    let hom_config = HomConfig::new(
        a,
        b,
        h.weight_a,
        h.weight_b,
        h.g2zero_a,
        h.g2zero_b,
        h.r_constant,
        detuning,
    )
    .map_err(|e| CliError::Config(format!("/hom: {e}")))?;

    let g2a = hom::floored_g2_curve(&a, grid, h.g2zero_a)?;
    let g2b = hom::floored_g2_curve(&b, grid, h.g2zero_b)?;
    let g1a = tls::g1_curve(&a, grid)?;
    let g1b = tls::g1_curve(&b, grid)?;

    let cross = hom::g2_cross(&hom_config, &g2a, &g2b)?;
    let parallel = match detuning {
        Detuning::Fixed(dw) => hom::g2_parallel(&hom_config, &g2a, &g2b, &g1a, &g1b, dw)?,
        Detuning::GaussianEnsemble(sigma) => {
            let analytic =
                hom::ensemble_average_parallel(&hom_config, &g2a, &g2b, &g1a, &g1b, sigma)?;
            if let Some(n) = mc_samples {
                let mc = hom::ensemble_average_parallel_mc(
                    &hom_config, &g2a, &g2b, &g1a, &g1b, sigma, n, cli.seed,
                )?;
                let max_diff = analytic
                    .values
                    .iter()
                    .zip(&mc.values)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                println!("hom: analytic vs Monte Carlo ({n} samples) max diff {max_diff:.3e}");
            }
            analytic
        }
    };
    let vis = hom::visibility(&parallel, &cross)?;

    let summary = HomSummary {
        r: hom_config.effective_r()?,
        v_peak: vis.value_at_zero()?,
        g2_parallel_zero: parallel.value_at_zero()?,
        g2_cross_zero: cross.value_at_zero()?,
        ensemble_sigma_mhz_over_2pi: ensemble,
    };
    println!(
        "hom: R = {:.4}, V(0) = {:.4}, g2_parallel(0) = {:.4}",
        summary.r, summary.v_peak, summary.g2_parallel_zero
    );

    let mut out = OutputSet::new(out_dir(cli, &config));
    out.add_curve("g2_cross", &cross, csv, json);
    out.add_curve("g2_parallel", &parallel, csv, json);
    out.add_curve("visibility", &vis, csv, json);
    out.add(
        "summary.json",
        serde_json::to_string_pretty(&summary)
            .expect("summary serializes")
            .into_bytes(),
    );
    out.commit()
}

// --- fit command -----------------------------------------------------------

fn model_param_names(model: &str) -> Option<&'static [&'static str]> {
    match model {
        "lorentzian" => Some(&["center", "fwhm", "amplitude", "offset"]),
        "voigt" => Some(&["center", "lorentz_fwhm", "gauss_sigma", "amplitude", "offset"]),
        "saturation" => Some(&["i_inf", "p_sat"]),
        "decay" => Some(&[
            "gamma_fast_ns_inv",
            "gamma_slow_ns_inv",
            "amp_fast",
            "amp_slow",
            "fss_ghz",
            "beat_visibility",
            "beat_phase",
            "t0_ns",
        ]),
        _ => None,
    }
}

type DataColumns = (Vec<f64>, Vec<f64>, Option<Vec<f64>>);

fn read_data_csv(path: &Path) -> Result<DataColumns, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut sigma = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields[0].parse::<f64>().is_err() && lineno == 0 {
            continue; // header
        }
        if fields.len() < 2 {
            return Err(CliError::Config(format!(
                "{}: line {} needs at least x,y",
                path.display(),
                lineno + 1
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "{}: line {}: bad number {s:?}",
                    path.display(),
                    lineno + 1
                ))
            })
        };
        x.push(parse(fields[0])?);
        y.push(parse(fields[1])?);
        if fields.len() >= 3 {
            sigma.push(parse(fields[2])?);
        }
    }
    if x.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let sigma = if sigma.is_empty() {
        None
    } else if sigma.len() == x.len() {
        Some(sigma)
    } else {
        return Err(CliError::Config(format!(
            "{}: sigma_y column is incomplete",
            path.display()
        )));
    };
    Ok((x, y, sigma))
}

#[derive(Serialize)]
struct FitReportParam {
    name: String,
    value: f64,
    uncertainty: f64,
    fixed: bool,
}

#[derive(Serialize)]
struct FitReport {
    model: String,
    params: Vec<FitReportParam>,
    chi2: f64,
    reduced_chi2: f64,
    iterations: usize,
    converged: bool,
    message: String,
}

fn cmd_fit(cli: &Cli, model: &str, data: &Path) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let names = model_param_names(model).ok_or_else(|| {
        CliError::Config(format!(
            "unknown fit model {model:?}; expected lorentzian, voigt, saturation or decay"
        ))
    })?;
    let section = config
        .fit
        .as_ref()
        .ok_or_else(|| CliError::Config("/fit: section is required".into()))?;

    let mut initial = Vec::with_capacity(names.len());
    for &name in names {
        let v = section
            .initial
            .get(name)
            .and_then(|v| v.as_f64())
            .ok_or_else(|| {
                CliError::Config(format!("/fit/initial/{name}: numeric value required"))
            })?;
        initial.push(v);
    }
    for key in section.initial.keys() {
        if !names.contains(&key.as_str()) {
            return Err(CliError::Config(format!(
                "/fit/initial/{key}: not a parameter of model {model}"
            )));
        }
    }
    let fixed: Vec<bool> = names
        .iter()
        .map(|n| section.fixed.iter().any(|f| f == n))
        .collect();
    for f in &section.fixed {
        if !names.contains(&f.as_str()) {
            return Err(CliError::Config(format!(
                "/fit/fixed: {f:?} is not a parameter of model {model}"
            )));
        }
    }
    let bounds = match &section.bounds {
        None => None,
        Some(map) => {
            let mut b = vec![(f64::NEG_INFINITY, f64::INFINITY); names.len()];
            for (key, v) in map {
                let idx = names.iter().position(|n| n == key).ok_or_else(|| {
                    CliError::Config(format!(
                        "/fit/bounds/{key}: not a parameter of model {model}"
                    ))
                })?;
                let pair = v.as_array().and_then(|a| {
                    Some((a.first()?.as_f64()?, a.get(1)?.as_f64()?))
                });
                b[idx] = pair.ok_or_else(|| {
                    CliError::Config(format!("/fit/bounds/{key}: expected [lo, hi]"))
                })?;
            }
            Some(b)
        }
    };

    let (x, y, sigma) = read_data_csv(data)?;
    let irf = config.irf()?;
    let model_name = model.to_string();
    let eval = move |p: &[f64], x: f64| -> f64 {
        match model_name.as_str() {
            "lorentzian" => lorentzian(
                x,
                &LineshapeParams {
                    center: p[0],
                    lorentz_fwhm: p[1],
                    gauss_sigma: 0.0,
                    amplitude: p[2],
                    offset: p[3],
                },
            ),
            "voigt" => voigt(
                x,
                &LineshapeParams {
                    center: p[0],
                    lorentz_fwhm: p[1],
                    gauss_sigma: p[2],
                    amplitude: p[3],
                    offset: p[4],
                },
            ),
            "saturation" => saturation_intensity(
                x.max(f64::MIN_POSITIVE),
                &SaturationParams {
                    i_inf: p[0],
                    p_sat: p[1],
                    b_offset: 0.0,
                },
            )
            .unwrap_or(f64::NAN),
            "decay" => decay_intensity(
                x,
                &DecayModelParams {
                    gamma_fast_ns_inv: p[0],
                    gamma_slow_ns_inv: p[1],
                    amp_fast: p[2],
                    amp_slow: p[3],
                    fss_ghz: (p[4] > 0.0).then_some(p[4]),
                    beat_visibility: p[5],
                    beat_phase: p[6],
                    irf,
                    t0_ns: p[7],
                },
            ),
            _ => unreachable!(),
        }
    };

    let mut problem = FitProblem::new(eval, x, y, initial).with_fixed(fixed);
    if let Some(s) = sigma {
        problem = problem.with_sigma(s);
    }
    if let Some(b) = bounds {
        problem = problem.with_bounds(b);
    }
    let result = fit(&problem).map_err(|e| CliError::Config(format!("/fit: {e}")))?;
    if !result.converged {
        return Err(CliError::Numeric(format!("fit failed: {}", result.message)));
    }

    let uncertainties = result.uncertainties();
    let report = FitReport {
        model: model.to_string(),
        params: names
            .iter()
            .enumerate()
            .map(|(i, n)| FitReportParam {
                name: n.to_string(),
                value: result.params[i],
                uncertainty: uncertainties[i],
                fixed: problem.fixed[i],
            })
            .collect(),
        chi2: result.chi2,
        reduced_chi2: result.reduced_chi2,
        iterations: result.iterations,
        converged: result.converged,
        message: result.message.clone(),
    };
    println!(
        "fit[{model}]: converged in {} iterations, reduced chi2 = {:.4}",
        report.iterations, report.reduced_chi2
    );

    let mut out = OutputSet::new(out_dir(cli, &config));
    out.add(
        "fit_result.json",
        serde_json::to_string_pretty(&report)
            .expect("report serializes")
            .into_bytes(),
    );
    out.commit()
}

fn cmd_yield_map(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let y = config
        .yield_section
        .as_ref()
        .ok_or_else(|| CliError::Config("/yield: section is required".into()))?;
    let yc = YieldConfig {
        sigma_nm: y.sigma_nm,
        center_nm: y.center_nm,
        area_um2: y.area_um2,
        density_per_um2: y.density_per_um2,
        penalty: y.penalty,
        convention: y.convention,
    };
    yc.validate().map_err(|e| CliError::Config(format!("/yield: {e}")))?;
    let grid = pair_yield::yield_map(&yc, &y.delta_lambda_axis_nm, &y.density_axis_per_um2)
        .map_err(|e| CliError::Config(format!("/yield: {e}")))?;
    let mut buf = Vec::new();
    grid.write_csv(&mut buf)?;
    let mut out = OutputSet::new(out_dir(cli, &config));
    out.add("yield_map.csv", buf);
    out.commit()
}

fn cmd_irf_sweep(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let s = config
        .irf_sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("/irf_sweep: section is required".into()))?;
    let irf = config.irf()?;
    let axis: Vec<f64> = (0..s.points)
        .map(|i| {
            s.gamma_min_mhz_over_2pi
                + (s.gamma_max_mhz_over_2pi - s.gamma_min_mhz_over_2pi) * i as f64
                    / (s.points - 1) as f64
        })
        .collect();
    let rows = tpqi::irf::jitter_sweep(&axis, &irf, s.omega_ratio)?;
    let mut text = String::from("gamma_mhz_over_2pi,g2_zero\n");
    for (mhz, v) in rows {
        text.push_str(&format!("{mhz},{v:.8e}\n"));
    }
    let mut out = OutputSet::new(out_dir(cli, &config));
    out.add("irf_sweep.csv", text.into_bytes());
    out.commit()
}
