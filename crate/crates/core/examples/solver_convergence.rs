//! Plain lagged diffusivity against the default accelerated iteration on the
//! same problem: iterations, final objective and descent.

use mixreg::experiment::{seed_data, ExperimentConfig};
use mixreg::linalg::LinearSolver;
use mixreg::penalty::{default_beta, PenalizerSpec};
use mixreg::solver::{solve, SolverConfig};
use mixreg::theta::build_binary;

fn main() -> mixreg::error::Result<()> {
    let data = seed_data(&ExperimentConfig::default(), 0)?;
    let grid = data.op.grid();
    let spec = PenalizerSpec::new(
        8e-4,
        8e-4,
        build_binary(grid, 0.0, 0.4)?,
        default_beta(&data.noisy),
    )?;
    for (name, cfg) in [
        ("accelerated", SolverConfig::default()),
        (
            "accelerated, CG",
            SolverConfig {
                linear_solver: LinearSolver::ConjugateGradient,
                ..Default::default()
            },
        ),
        (
            "lagged diffusivity",
            SolverConfig {
                accelerate: false,
                ..Default::default()
            },
        ),
        (
            "lagged diffusivity x25",
            SolverConfig {
                accelerate: false,
                max_iters: 5000,
                ..Default::default()
            },
        ),
    ] {
        let start = std::time::Instant::now();
        let r = solve(&data.noisy, &data.op, &spec, &cfg, None)?;
        let monotone = r.objective_history.windows(2).all(|w| w[1] <= w[0] + 1e-10);
        println!(
            "{name:24} iterations {:5}  converged {:5}  F {:.12e}  |grad| {:.1e}  monotone {monotone}  {:.1?}",
            r.iterations,
            r.converged,
            r.objective,
            r.grad_inf_norm,
            start.elapsed()
        );
    }
    Ok(())
}
