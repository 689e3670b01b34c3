//! Builds the weight from the data alone: Gaussian-smoothed gradient modulus
//! of a Tikhonov pre-solve, rescaled to [0, 1].

use mixreg::experiment::{seed_data, ExperimentConfig};
use mixreg::regparam::{noise_delta, MorozovSpec};
use mixreg::signals::SignalKind;
use mixreg::theta::build_data_driven;

fn main() -> mixreg::error::Result<()> {
    for signal in [SignalKind::Example31, SignalKind::Example32] {
        let cfg = ExperimentConfig {
            signal,
            ..Default::default()
        };
        let data = seed_data(&cfg, 0)?;
        let grid = data.op.grid();
        let d = build_data_driven(
            &data.noisy,
            &data.op,
            cfg.sigma_b,
            &MorozovSpec::new(noise_delta(data.sigma, grid)),
        )?;
        let theta = d.theta.theta();
        let peak = (0..theta.len())
            .max_by(|&a, &b| theta[a].total_cmp(&theta[b]))
            .unwrap_or(0);
        println!(
            "{}: pre-solve alpha {:.3e}, theta peaks at t = {:.3}, mean theta {:.3}",
            signal.name(),
            d.tikhonov_alpha,
            grid.node(peak),
            theta.iter().sum::<f64>() / theta.len() as f64
        );
        let bars: String = theta
            .iter()
            .step_by(3)
            .map(|t| [' ', '.', ':', '-', '=', '+', '*', '#'][(t * 7.0).round() as usize])
            .collect();
        println!("  |{bars}|");
    }
    Ok(())
}
