//! Runs the four methods on both test signals over five noise seeds, writes
//! CSVs and SVG plots, and prints median ISNR tables.
//!
//!     cargo run --release --example reproduce_tables -- [out_dir]

use std::path::PathBuf;

use mixreg::experiment::{median_isnr, run_experiment, ExperimentConfig, Method};
use mixreg::plot::emit_plots;
use mixreg::signals::SignalKind;

fn main() -> mixreg::error::Result<()> {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("mixreg-tables"));
    for signal in [SignalKind::Example31, SignalKind::Example32] {
        let cfg = ExperimentConfig {
            signal,
            out_dir: root.join(signal.name()),
            ..Default::default()
        };
        let cells = run_experiment(&cfg)?;
        let plots = emit_plots(&cfg.out_dir)?;
        println!(
            "{} ({} seeds, {} plots in {})",
            signal.name(),
            cfg.seeds.len(),
            plots.len(),
            cfg.out_dir.display()
        );
        println!("  {:<20} {:>8}  per seed", "method", "median");
        for m in Method::ALL {
            let per_seed: Vec<String> = cells
                .iter()
                .filter(|c| c.method == m)
                .map(|c| {
                    c.result
                        .as_ref()
                        .map_or("err".into(), |r| format!("{:.2}", r.isnr))
                })
                .collect();
            println!(
                "  {:<20} {:>8.4}  {}",
                m.name(),
                median_isnr(&cells, m).unwrap_or(f64::NAN),
                per_seed.join(" ")
            );
        }
    }
    Ok(())
}
