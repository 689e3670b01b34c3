//! Batch restoration experiments: metrics, configuration and CSV output.
//!
//! Output layout under `out_dir`:
//!
//! | file | columns |
//! |---|---|
//! | `summary.csv` | `seed,method,alpha,discrepancy,iterations,isnr,status` |
//! | `seed{s}_{method}.csv` | `t,f_true,g_noisy,f_restored` |
//! | `seed{s}_{method}_theta.csv` | `t,theta` (mixed methods only) |

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blur::{BlurOperator, KernelSpec};
use crate::error::{Error, Result};
use crate::io::{fmt_real, write_columns_file};
use crate::linalg::LinearSolver;
use crate::penalty::{default_beta, WeightField};
use crate::regparam::{morozov_select, noise_delta, MorozovSpec, Penalty, Problem};
use crate::signals::{add_noise, synth_signal, Grid, NoiseSpec, Signal, SignalKind};
use crate::solver::SolverConfig;
use crate::theta::{build_data_driven, build_indicator};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: [&str; 7] = [
    "seed",
    "method",
    "alpha",
    "discrepancy",
    "iterations",
    "isnr",
    "status",
];
pub const CELL_HEADER: [&str; 4] = ["t", "f_true", "g_noisy", "f_restored"];

/// Improvement in signal-to-noise ratio, in dB:
/// `10 log10(sum (f - g)^2 / sum (f - f_restored)^2)`.
///
/// `+inf` when the restoration is exact; an error when `g == f`.
pub fn isnr(f_true: &Signal, g_noisy: &Signal, f_restored: &Signal) -> Result<f64> {
    g_noisy.check_grid(f_true.grid())?;
    f_restored.check_grid(f_true.grid())?;
    let sq = |a: &Signal, b: &Signal| -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    };
    let num = sq(f_true, g_noisy);
    if num == 0.0 {
        return Err(Error::UndefinedMetric("isnr: noisy data equals the truth"));
    }
    let den = sq(f_true, f_restored);
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (num / den).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tikhonov,
    Tv,
    MixedBinary,
    MixedDataDriven,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Tikhonov,
        Method::Tv,
        Method::MixedBinary,
        Method::MixedDataDriven,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Tikhonov => "tikhonov",
            Method::Tv => "tv",
            Method::MixedBinary => "mixed_binary",
            Method::MixedDataDriven => "mixed_data_driven",
        }
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, Method::MixedBinary | Method::MixedDataDriven)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param("method", format!("unknown method `{s}`")))
    }
}

/// Flat JSON configuration; every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub signal: SignalKind,
    pub n: usize,
    pub sigma_b: f64,
    pub noise_level: f64,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
    /// Intervals where the binary weight is 1. Empty means the default mask of
    /// the chosen signal.
    pub binary_intervals: Vec<(f64, f64)>,
    /// Smoothing width for the data-driven weight; defaults to `sigma_b`.
    pub theta_sigma_smooth: Option<f64>,
    /// TV smoothing; defaults to `1e-4 * range(v)`.
    pub beta: Option<f64>,
    pub tau: f64,
    pub log_alpha_min: f64,
    pub log_alpha_max: f64,
    pub bisect_tol: f64,
    pub max_bisections: usize,
    pub max_iters: usize,
    pub rel_change_tol: f64,
    pub linear_solver: LinearSolver,
    pub accelerate: bool,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let morozov = MorozovSpec::new(1.0);
        let solver = SolverConfig::default();
        Self {
            signal: SignalKind::Example31,
            n: 130,
            sigma_b: 0.05,
            noise_level: 0.01,
            seeds: (0..5).collect(),
            methods: Method::ALL.to_vec(),
            binary_intervals: Vec::new(),
            theta_sigma_smooth: None,
            beta: None,
            tau: morozov.tau,
            log_alpha_min: morozov.log_alpha_range.0,
            log_alpha_max: morozov.log_alpha_range.1,
            bisect_tol: morozov.bisect_tol,
            max_bisections: morozov.max_bisections,
            max_iters: solver.max_iters,
            rel_change_tol: solver.rel_change_tol,
            linear_solver: solver.linear_solver,
            accelerate: solver.accelerate,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Default binary mask for each test signal.
pub fn default_binary_intervals(signal: SignalKind) -> Vec<(f64, f64)> {
    match signal {
        SignalKind::Example31 => vec![(0.0, 0.4)],
        SignalKind::Example32 => vec![(0.3, 0.65)],
        SignalKind::Step => vec![(0.4, 0.6)],
        SignalKind::Bump | SignalKind::Constant => vec![(0.0, 1.0)],
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<config>"),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        Grid::new(self.n)?;
        KernelSpec::new(self.sigma_b)?;
        NoiseSpec::new(self.noise_level, 0)?;
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "need at least one seed"));
        }
        if self.methods.is_empty() {
            return Err(Error::param("methods", "need at least one method"));
        }
        if let Some(s) = self.theta_sigma_smooth {
            KernelSpec::new(s)?;
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::param("beta", "must be positive"));
            }
        }
        build_indicator(Grid::new(self.n)?, &self.binary_intervals())?;
        self.morozov(1.0).validate()?;
        self.solver().validate()
    }

    pub fn binary_intervals(&self) -> Vec<(f64, f64)> {
        if self.binary_intervals.is_empty() {
            default_binary_intervals(self.signal)
        } else {
            self.binary_intervals.clone()
        }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            rel_change_tol: self.rel_change_tol,
            linear_solver: self.linear_solver,
            accelerate: self.accelerate,
            ..SolverConfig::default()
        }
    }

    pub fn morozov(&self, delta: f64) -> MorozovSpec {
        MorozovSpec {
            tau: self.tau,
            delta,
            log_alpha_range: (self.log_alpha_min, self.log_alpha_max),
            bisect_tol: self.bisect_tol,
            max_bisections: self.max_bisections,
        }
    }
}

/// Synthetic data of one seed.
#[derive(Debug, Clone)]
pub struct SeedData {
    pub truth: Signal,
    pub noisy: Signal,
    pub sigma: f64,
    pub op: BlurOperator,
}

pub fn seed_data(cfg: &ExperimentConfig, seed: u64) -> Result<SeedData> {
    let grid = Grid::new(cfg.n)?;
    let op = BlurOperator::build(grid, KernelSpec::new(cfg.sigma_b)?);
    let truth = synth_signal(cfg.signal, grid);
    let (noisy, sigma) = add_noise(&op.apply(&truth)?, &NoiseSpec::new(cfg.noise_level, seed)?)?;
    Ok(SeedData {
        truth,
        noisy,
        sigma,
        op,
    })
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub seed: u64,
    pub method: Method,
    pub alpha: f64,
    pub isnr: f64,
    pub discrepancy: f64,
    pub iterations: usize,
    pub restored: Signal,
    /// Weight used by the mixed methods.
    pub theta: Option<WeightField>,
    pub warnings: Vec<String>,
}

/// Outcome of one (seed, method) cell.
#[derive(Debug)]
pub struct Cell {
    pub seed: u64,
    pub method: Method,
    pub result: Result<MethodResult>,
}

impl Cell {
    pub fn status(&self) -> String {
        match &self.result {
            Ok(r) if r.warnings.is_empty() => "ok".to_string(),
            Ok(r) => format!("ok ({})", r.warnings.join("; ")),
            Err(e) => format!("error: {e}"),
        }
    }
}

/// Restores one seed's data with one method.
pub fn run_cell(
    cfg: &ExperimentConfig,
    data: &SeedData,
    seed: u64,
    method: Method,
) -> Result<MethodResult> {
    let grid = data.op.grid();
    let morozov = cfg.morozov(noise_delta(data.sigma, grid));
    let beta = cfg.beta.unwrap_or_else(|| default_beta(&data.noisy));
    let mut warnings = Vec::new();
    let (penalty, theta) = match method {
        Method::Tikhonov => (Penalty::Tikhonov, None),
        Method::Tv => (Penalty::TotalVariation, None),
        Method::MixedBinary => {
            let w = build_indicator(grid, &cfg.binary_intervals())?;
            (Penalty::Mixed(w.clone()), Some(w))
        }
        Method::MixedDataDriven => {
            let sigma_smooth = cfg.theta_sigma_smooth.unwrap_or(cfg.sigma_b);
            let d = build_data_driven(&data.noisy, &data.op, sigma_smooth, &morozov)?;
            warnings.extend(d.warnings.into_iter().map(|w| format!("theta: {w}")));
            (Penalty::Mixed(d.theta.clone()), Some(d.theta))
        }
    };
    let problem = Problem {
        data: &data.noisy,
        op: &data.op,
        penalty,
        beta,
        solver: cfg.solver(),
    };
    let outcome = morozov_select(&problem, &morozov)?;
    warnings.extend(outcome.warnings);
    if !outcome.report.converged {
        warnings.push(format!(
            "solver stopped at {} iterations",
            outcome.report.iterations
        ));
    }
    let restored = outcome.report.minimizer;
    Ok(MethodResult {
        seed,
        method,
        alpha: outcome.alpha,
        isnr: isnr(&data.truth, &data.noisy, &restored)?,
        discrepancy: outcome.report.discrepancy,
        iterations: outcome.report.iterations,
        restored,
        theta,
        warnings,
    })
}

/// Runs every (seed, method) cell and writes the CSV outputs.
///
/// Cells run in parallel; a failing cell is reported in its summary row and
/// does not stop the others. Cells come back in config order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Cell>> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let jobs: Vec<(u64, Method)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| cfg.methods.iter().map(move |&m| (s, m)))
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(seed, method)| {
            let result = seed_data(cfg, seed).and_then(|data| {
                let r = run_cell(cfg, &data, seed, method)?;
                write_cell(&cfg.out_dir, &data, &r)?;
                Ok(r)
            });
            Cell {
                seed,
                method,
                result,
            }
        })
        .collect();
    write_summary(&cfg.out_dir.join(SUMMARY_FILE), &cells)?;
    Ok(cells)
}

pub fn cell_file(out_dir: &Path, seed: u64, method: Method) -> PathBuf {
    out_dir.join(format!("seed{seed}_{method}.csv"))
}

pub fn theta_file(out_dir: &Path, seed: u64, method: Method) -> PathBuf {
    out_dir.join(format!("seed{seed}_{method}_theta.csv"))
}

fn write_cell(out_dir: &Path, data: &SeedData, r: &MethodResult) -> Result<()> {
    let t = data.op.grid().nodes();
    write_columns_file(
        &cell_file(out_dir, r.seed, r.method),
        &CELL_HEADER,
        &[
            &t,
            data.truth.values(),
            data.noisy.values(),
            r.restored.values(),
        ],
    )?;
    if let Some(theta) = &r.theta {
        theta.write_csv(&theta_file(out_dir, r.seed, r.method))?;
    }
    Ok(())
}

pub fn write_summary(path: &Path, cells: &[Cell]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for cell in cells {
        let mut row = vec![cell.seed.to_string(), cell.method.to_string()];
        match &cell.result {
            Ok(r) => row.extend([
                fmt_real(r.alpha),
                fmt_real(r.discrepancy),
                r.iterations.to_string(),
                fmt_real(r.isnr),
            ]),
            Err(_) => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        row.push(cell.status());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Median ISNR per method over the successful cells.
pub fn median_isnr(cells: &[Cell], method: Method) -> Option<f64> {
    let mut values: Vec<f64> = cells
        .iter()
        .filter(|c| c.method == method)
        .filter_map(|c| c.result.as_ref().ok().map(|r| r.isnr))
        .collect();
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}
