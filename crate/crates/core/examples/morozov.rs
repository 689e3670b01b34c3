//! Residual as a function of alpha for the mixed method, and the point the
//! discrepancy principle picks on it.

use mixreg::experiment::{seed_data, ExperimentConfig};
use mixreg::penalty::default_beta;
use mixreg::regparam::{discrepancy, morozov_select, noise_delta, MorozovSpec, Penalty, Problem};
use mixreg::solver::SolverConfig;
use mixreg::theta::build_binary;

fn main() -> mixreg::error::Result<()> {
    let cfg = ExperimentConfig::default();
    let data = seed_data(&cfg, 1)?;
    let grid = data.op.grid();
    let problem = Problem {
        data: &data.noisy,
        op: &data.op,
        penalty: Penalty::Mixed(build_binary(grid, 0.0, 0.4)?),
        beta: default_beta(&data.noisy),
        solver: SolverConfig::default(),
    };
    let spec = MorozovSpec::new(noise_delta(data.sigma, grid));
    println!("target tau * delta = {:.5e}", spec.target());
    for k in -7..=0 {
        let alpha = 10f64.powi(k);
        println!(
            "alpha 1e{k:<3} residual {:.5e}",
            discrepancy(alpha, &problem)?
        );
    }
    let sel = morozov_select(&problem, &spec)?;
    println!(
        "selected alpha {:.5e} after {} bisections, residual {:.6e}, within tolerance {}",
        sel.alpha, sel.bisections, sel.report.discrepancy, sel.within_tolerance
    );
    Ok(())
}
