//! Cross-checks the production code against the brute-force references on
//! small grids: the dual form of the weighted TV and a multi-start global
//! minimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mixreg::blur::{BlurOperator, KernelSpec};
use mixreg::oracle::{brute_minimize, dual_sup_weighted};
use mixreg::penalty::{weighted_tv, PenalizerSpec, WeightField};
use mixreg::signals::{Grid, Signal};
use mixreg::solver::{solve, SolverConfig};

fn main() -> mixreg::error::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let g = Grid::new(6)?;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let u = Signal::from_fn(g, |_| rng.random_range(-1.0..1.0));
        let theta = WeightField::new(
            g,
            (0..g.len()).map(|_| rng.random_range(0.0..=1.0)).collect(),
        )?;
        worst = worst.max((dual_sup_weighted(&u, &theta, 3)? - weighted_tv(&u, &theta)?).abs());
    }
    println!("dual form vs closed form, 200 pairs: max difference {worst:.2e}");

    let g = Grid::new(8)?;
    for k in 0..5 {
        let op = BlurOperator::build(g, KernelSpec::new(0.1)?);
        let v = Signal::from_fn(g, |_| rng.random_range(-1.0..1.0));
        let theta = WeightField::new(
            g,
            (0..g.len()).map(|_| rng.random_range(0.0..=1.0)).collect(),
        )?;
        let spec = PenalizerSpec::new(0.05, 0.05, theta, 1e-3)?;
        let (_, best) = brute_minimize(&v, &op, &spec)?;
        let report = solve(&v, &op, &spec, &SolverConfig::default(), None)?;
        println!(
            "problem {k}: oracle {best:.12}  solver {:.12}  difference {:.1e}",
            report.objective,
            report.objective - best
        );
    }
    Ok(())
}
