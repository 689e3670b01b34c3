use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mixreg::blur::{BlurOperator, KernelSpec};
use mixreg::error::{Error, Result};
use mixreg::experiment::{median_isnr, run_experiment, ExperimentConfig};
use mixreg::penalty::{default_beta, WeightField};
use mixreg::plot::emit_plots;
use mixreg::regparam::{morozov_select, noise_delta, MorozovSpec, Penalty, Problem};
use mixreg::signals::Signal;
use mixreg::solver::SolverConfig;
use mixreg::theta::{build_data_driven, build_indicator};

#[derive(Parser)]
#[command(
    name = "mixreg",
    version,
    about = "Deblurring of 1D signals with mixed L2 / TV penalties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch experiment from a JSON config; writes CSVs and SVG plots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out_dir` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `seeds` of the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        no_plots: bool,
    },
    /// Restore one signal given as a `t,value` CSV.
    Solve(SolveArgs),
    /// Build the data-driven weight for a `t,value` CSV.
    Theta {
        #[command(flatten)]
        data: DataArgs,
        /// Smoothing width; defaults to `--sigma-b`.
        #[arg(long)]
        sigma_smooth: Option<f64>,
        #[arg(long, default_value_t = 1.1)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    sigma_b: f64,
    /// Relative noise level, used for the Morozov target.
    #[arg(long, default_value_t = 0.01)]
    noise_level: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tikhonov,
    Tv,
    Mixed,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[command(flatten)]
    data: DataArgs,
    /// Fixed regularization parameter.
    #[arg(long, conflicts_with = "morozov")]
    alpha: Option<f64>,
    /// Discrepancy-principle factor tau (the default when `--alpha` is absent).
    #[arg(long)]
    morozov: Option<f64>,
    /// `auto`, `binary:a,b` or a `t,theta` CSV file. Mixed method only.
    #[arg(long, default_value = "auto")]
    theta: String,
    /// TV smoothing; defaults to 1e-4 times the data range.
    #[arg(long)]
    beta: Option<f64>,
    /// Output `t,value` CSV; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_data(args: &DataArgs) -> Result<(Signal, BlurOperator, f64)> {
    let v = Signal::read_csv(&args.input)?;
    let op = BlurOperator::build(v.grid(), KernelSpec::new(args.sigma_b)?);
    if !(args.noise_level > 0.0) {
        return Err(Error::InvalidParameter {
            name: "noise-level",
            reason: "must be positive".into(),
        });
    }
    let delta = noise_delta(args.noise_level * v.range(), v.grid());
    Ok((v, op, delta))
}

fn parse_theta(
    spec: &str,
    v: &Signal,
    op: &BlurOperator,
    morozov: &MorozovSpec,
) -> Result<WeightField> {
    if spec == "auto" {
        let d = build_data_driven(v, op, op.kernel().sigma_b(), morozov)?;
        for w in &d.warnings {
            eprintln!("warning: {w}");
        }
        return Ok(d.theta);
    }
    if let Some(rest) = spec.strip_prefix("binary:") {
        let bad = || Error::InvalidParameter {
            name: "theta",
            reason: format!("expected binary:a,b, got `{spec}`"),
        };
        let (a, b) = rest.split_once(',').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        return build_indicator(v.grid(), &[(a, b)]);
    }
    let w = WeightField::read_csv(Path::new(spec))?;
    if w.grid() != v.grid() {
        return Err(Error::Dimension {
            expected: v.len(),
            actual: w.theta().len(),
        });
    }
    Ok(w)
}

fn solve_cmd(args: SolveArgs) -> Result<()> {
    let (v, op, delta) = load_data(&args.data)?;
    let morozov = MorozovSpec::new(delta).with_tau(args.morozov.unwrap_or(1.1));
    let penalty = match args.method {
        MethodArg::Tikhonov => Penalty::Tikhonov,
        MethodArg::Tv => Penalty::TotalVariation,
        MethodArg::Mixed => Penalty::Mixed(parse_theta(&args.theta, &v, &op, &morozov)?),
    };
    let problem = Problem {
        data: &v,
        op: &op,
        penalty,
        beta: args.beta.unwrap_or_else(|| default_beta(&v)),
        solver: SolverConfig::default(),
    };
    let (alpha, report) = match args.alpha {
        Some(alpha) => (alpha, problem.solve(alpha)?),
        None => {
            let outcome = morozov_select(&problem, &morozov)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            (outcome.alpha, outcome.report)
        }
    };
    eprintln!(
        "alpha {alpha:.6e}  discrepancy {:.6e}  iterations {}  converged {}",
        report.discrepancy, report.iterations, report.converged
    );
    match args.out {
        Some(path) => report.minimizer.write_csv(&path),
        None => {
            let t = v.grid().nodes();
            mixreg::io::write_columns(
                std::io::stdout().lock(),
                &["t", "value"],
                &[&t, report.minimizer.values()],
            )
            .map_err(|e| Error::Parse {
                path: PathBuf::from("<stdout>"),
                message: e.to_string(),
            })
        }
    }
}

fn run_cmd(
    config: &Path,
    out: Option<PathBuf>,
    seeds: Option<Vec<u64>>,
    plots: bool,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    if let Some(seeds) = seeds {
        cfg.seeds = seeds;
    }
    let cells = run_experiment(&cfg)?;
    let failed = cells.iter().filter(|c| c.result.is_err()).count();
    for c in cells.iter().filter(|c| c.result.is_err()) {
        eprintln!("seed {} {}: {}", c.seed, c.method, c.status());
    }
    println!("{:<20} median ISNR (dB)", "method");
    for &m in &cfg.methods {
        match median_isnr(&cells, m) {
            Some(x) => println!("{:<20} {x:.4}", m.name()),
            None => println!("{:<20} -", m.name()),
        }
    }
    if plots {
        let files = emit_plots(&cfg.out_dir)?;
        println!("{} plots written to {}", files.len(), cfg.out_dir.display());
    }
    if failed > 0 {
        eprintln!("{failed} of {} cells failed", cells.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seeds,
            no_plots,
        } => run_cmd(&config, out, seeds, !no_plots),
        Command::Solve(args) => solve_cmd(args),
        Command::Theta {
            data,
            sigma_smooth,
            tau,
            out,
        } => load_data(&data).and_then(|(v, op, delta)| {
            let morozov = MorozovSpec::new(delta).with_tau(tau);
            let d = build_data_driven(&v, &op, sigma_smooth.unwrap_or(data.sigma_b), &morozov)?;
            for w in &d.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("tikhonov alpha {:.6e}", d.tikhonov_alpha);
            d.theta.write_csv(&out)
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
