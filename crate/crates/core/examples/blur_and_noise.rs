//! Builds the Gaussian blur operator, blurs both test signals and adds 1%
//! noise. Writes `t,value` CSVs to the directory given as first argument
//! (default: the system temp dir).

use std::path::PathBuf;

use mixreg::blur::{BlurOperator, KernelSpec};
use mixreg::regparam::noise_delta;
use mixreg::signals::{add_noise, synth_signal, Grid, NoiseSpec, SignalKind};

fn main() -> mixreg::error::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let grid = Grid::new(130)?;
    let op = BlurOperator::build(grid, KernelSpec::new(0.05)?);

    let row_sum: f64 = op.matrix().row(65).sum();
    let asym = (op.matrix() - op.matrix().transpose()).amax();
    println!(
        "A is {0}x{0}, row sum {row_sum:.15}, max |A - A^T| {asym:.1e}",
        grid.len()
    );

    for kind in [SignalKind::Example31, SignalKind::Example32] {
        let truth = synth_signal(kind, grid);
        let blurred = op.apply(&truth)?;
        let (noisy, sigma) = add_noise(&blurred, &NoiseSpec::new(0.01, 0)?)?;
        println!(
            "{:10} range {:.3}  sigma {:.3e}  delta {:.3e}",
            kind.name(),
            blurred.range(),
            sigma,
            noise_delta(sigma, grid)
        );
        truth.write_csv(&out.join(format!("{}_truth.csv", kind.name())))?;
        noisy.write_csv(&out.join(format!("{}_noisy.csv", kind.name())))?;
    }
    println!("CSVs written to {}", out.display());
    Ok(())
}
