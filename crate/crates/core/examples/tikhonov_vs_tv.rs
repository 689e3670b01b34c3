//! The two single-penalty baselines on the first test signal, each with its
//! regularization parameter chosen by the discrepancy principle.

use mixreg::experiment::{isnr, seed_data, ExperimentConfig};
use mixreg::penalty::default_beta;
use mixreg::regparam::{morozov_select, noise_delta, MorozovSpec, Penalty, Problem};
use mixreg::solver::SolverConfig;

fn main() -> mixreg::error::Result<()> {
    let cfg = ExperimentConfig::default();
    let data = seed_data(&cfg, 3)?;
    let morozov = MorozovSpec::new(noise_delta(data.sigma, data.op.grid()));
    for (name, penalty) in [
        ("tikhonov", Penalty::Tikhonov),
        ("tv", Penalty::TotalVariation),
    ] {
        let problem = Problem {
            data: &data.noisy,
            op: &data.op,
            penalty,
            beta: default_beta(&data.noisy),
            solver: SolverConfig::default(),
        };
        let sel = morozov_select(&problem, &morozov)?;
        println!(
            "{name:9} alpha {:.4e}  residual {:.5e} (target {:.5e})  ISNR {:.3} dB",
            sel.alpha,
            sel.report.discrepancy,
            morozov.target(),
            isnr(&data.truth, &data.noisy, &sel.report.minimizer)?
        );
    }
    Ok(())
}
