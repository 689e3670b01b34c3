//! Mixed L2 / TV restoration with a binary weight: TV on the piecewise
//! constant part of the first test signal, order-zero Tikhonov elsewhere.

use mixreg::experiment::{isnr, seed_data, ExperimentConfig};
use mixreg::penalty::{default_beta, PenalizerSpec};
use mixreg::regparam::{morozov_select, noise_delta, MorozovSpec, Penalty, Problem};
use mixreg::solver::{solve, SolverConfig};
use mixreg::theta::build_binary;

fn main() -> mixreg::error::Result<()> {
    let cfg = ExperimentConfig::default();
    let data = seed_data(&cfg, 0)?;
    let grid = data.op.grid();
    let theta = build_binary(grid, 0.0, 0.4)?;
    let beta = default_beta(&data.noisy);

    let problem = Problem {
        data: &data.noisy,
        op: &data.op,
        penalty: Penalty::Mixed(theta.clone()),
        beta,
        solver: SolverConfig::default(),
    };
    let sel = morozov_select(&problem, &MorozovSpec::new(noise_delta(data.sigma, grid)))?;
    let r = &sel.report;
    println!(
        "alpha {:.4e}, {} iterations, converged {}, ISNR {:.3} dB",
        sel.alpha,
        r.iterations,
        r.converged,
        isnr(&data.truth, &data.noisy, &r.minimizer)?
    );

    // The same alpha with decoupled weights, for comparison.
    for scale in [0.1, 10.0] {
        let spec = PenalizerSpec::new(scale * sel.alpha, sel.alpha, theta.clone(), beta)?;
        let u = solve(&data.noisy, &data.op, &spec, &SolverConfig::default(), None)?.minimizer;
        println!(
            "alpha1 = {scale} alpha2: ISNR {:.3} dB",
            isnr(&data.truth, &data.noisy, &u)?
        );
    }

    println!("{:>6} {:>8} {:>8}", "t", "truth", "mixed");
    for j in (0..grid.len()).step_by(10) {
        println!(
            "{:6.3} {:8.4} {:8.4}",
            grid.node(j),
            data.truth.values()[j],
            r.minimizer.values()[j]
        );
    }
    Ok(())
}
