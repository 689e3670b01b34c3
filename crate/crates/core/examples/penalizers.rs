//! Evaluates the penalty terms on a test signal and checks the two
//! inequalities between weighted and plain total variation.

use mixreg::blur::{BlurOperator, KernelSpec};
use mixreg::penalty::{
    gradient, objective, tv_seminorm, weighted_l2_sq, weighted_tv, PenalizerSpec, WeightField,
};
use mixreg::signals::{synth_signal, Grid, SignalKind};
use mixreg::theta::build_binary;

fn main() -> mixreg::error::Result<()> {
    let grid = Grid::new(130)?;
    let u = synth_signal(SignalKind::Example31, grid);
    let tv = tv_seminorm(&u);
    println!("TV(u) = {tv:.6}");

    for (name, theta) in [
        ("theta = 1", WeightField::constant(grid, 1.0)?),
        ("theta = 0.3", WeightField::constant(grid, 0.3)?),
        ("binary [0, 0.4]", build_binary(grid, 0.0, 0.4)?),
        ("theta = 0", WeightField::constant(grid, 0.0)?),
    ] {
        let w = weighted_tv(&u, &theta)?;
        let l2 = weighted_l2_sq(&u, &theta)?;
        let m = theta
            .edge_theta()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let reverse = if m > 0.0 {
            format!("TV/min = {:.6}", w / m)
        } else {
            "no lower bound".into()
        };
        println!(
            "{name:16} W = {w:.6}  L2 = {l2:.6}  W <= TV: {}  {reverse}",
            w <= tv
        );
    }

    let op = BlurOperator::build(grid, KernelSpec::new(0.05)?);
    let v = op.apply(&u)?;
    let spec = PenalizerSpec::new(1e-3, 1e-3, build_binary(grid, 0.0, 0.4)?, 1e-4)?;
    let exact = objective(&u, &v, &op, &spec, false)?;
    let smooth = objective(&u, &v, &op, &spec, true)?;
    let g = gradient(&u, &v, &op, &spec)?;
    let gmax = g.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("F(truth): exact {exact:.8}, smoothed {smooth:.8}, |grad|_inf {gmax:.3e}");
    Ok(())
}
