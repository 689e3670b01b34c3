//! Restoration of blurred, noisy 1D signals with a spatially mixed penalizer.
//!
//! For data `v = A f + noise` on the grid `t_j = j / n` the restored signal
//! minimizes
//!
//! ```text
//! h ||A u - v||^2 + alpha1 h sum_j (1 - theta_j) u_j^2 + alpha2 sum_i thetabar_i |u_{i+1} - u_i|
//! ```
//!
//! with `theta` in `[0, 1]` and `thetabar_i = (theta_i + theta_{i+1}) / 2`.
//! Where `theta = 1` the penalty is total variation, where `theta = 0` it is
//! order-zero Tikhonov.
//!
//! ```
//! use mixreg::blur::{BlurOperator, KernelSpec};
//! use mixreg::penalty::{default_beta, PenalizerSpec};
//! use mixreg::signals::{add_noise, synth_signal, Grid, NoiseSpec, SignalKind};
//! use mixreg::solver::{solve, SolverConfig};
//! use mixreg::theta::build_binary;
//!
//! let grid = Grid::new(130)?;
//! let op = BlurOperator::build(grid, KernelSpec::new(0.05)?);
//! let truth = synth_signal(SignalKind::Example31, grid);
//! let (v, _sigma) = add_noise(&op.apply(&truth)?, &NoiseSpec::new(0.01, 7)?)?;
//! let theta = build_binary(grid, 0.0, 0.4)?;
//! let spec = PenalizerSpec::new(1e-3, 1e-3, theta, default_beta(&v))?;
//! let report = solve(&v, &op, &spec, &SolverConfig::default(), None)?;
//! assert!(report.converged);
//! # Ok::<(), mixreg::error::Error>(())
//! ```
//!
//! Modules, bottom up: [`signals`] (grid, test signals, noise), [`blur`]
//! (Gaussian operator), [`penalty`] (functionals and gradients), [`solver`],
//! [`regparam`] (discrepancy principle), [`theta`] (weight construction),
//! [`experiment`] and [`plot`] (batch runs), and [`oracle`] (brute-force
//! references, feature `oracle`).

pub mod blur;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
#[cfg(feature = "oracle")]
pub mod oracle;
pub mod penalty;
pub mod plot;
pub mod regparam;
pub mod signals;
pub mod solver;
pub mod theta;
