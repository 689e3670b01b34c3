//! Regularization-parameter choice by Morozov's discrepancy principle.
//!
//! A single scalar `alpha` scales the whole penalizer: for the mixed method
//! `alpha1 = alpha2 = alpha`, for Tikhonov and pure TV it is the only weight.
//! `alpha` is then chosen by bisection in `log10(alpha)` so that the
//! h-weighted residual `||A u_alpha - v||` equals `tau * delta`.

use crate::blur::BlurOperator;
use crate::error::{Error, Result};
use crate::penalty::{PenalizerSpec, WeightField};
use crate::signals::{Grid, Signal};
use crate::solver::{solve, solve_tikhonov, SolveReport, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorozovSpec {
    pub tau: f64,
    /// Noise-norm estimate in the h-weighted norm.
    pub delta: f64,
    /// Search interval for `log10(alpha)`.
    pub log_alpha_range: (f64, f64),
    /// Relative tolerance on `|discrepancy - tau delta| / (tau delta)`.
    pub bisect_tol: f64,
    pub max_bisections: usize,
}

impl MorozovSpec {
    pub fn new(delta: f64) -> Self {
        Self {
            tau: 1.1,
            delta,
            log_alpha_range: (-12.0, 4.0),
            bisect_tol: 1e-3,
            max_bisections: 60,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn target(&self) -> f64 {
        self.tau * self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 1.0) {
            return Err(Error::param(
                "tau",
                format!("must be >= 1, got {}", self.tau),
            ));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::param(
                "delta",
                format!("must be positive, got {}", self.delta),
            ));
        }
        let (lo, hi) = self.log_alpha_range;
        if !(lo < hi) {
            return Err(Error::param(
                "log_alpha_range",
                format!("need low < high, got ({lo}, {hi})"),
            ));
        }
        if !(self.bisect_tol > 0.0) {
            return Err(Error::param("bisect_tol", "must be positive"));
        }
        Ok(())
    }
}

/// Noise norm `delta = sigma * sqrt(h (n + 1))` for i.i.d. noise of std `sigma`,
/// so that `E ||eta||_h^2 = delta^2`.
pub fn noise_delta(sigma: f64, grid: Grid) -> f64 {
    sigma * (grid.h() * grid.len() as f64).sqrt()
}

/// Which penalizer `alpha` scales.
#[derive(Debug, Clone, PartialEq)]
pub enum Penalty {
    /// `alpha ||u||^2`.
    Tikhonov,
    /// `alpha TV(u)`.
    TotalVariation,
    /// `alpha (||sqrt(1 - theta) u||^2 + W_theta(u))`.
    Mixed(WeightField),
}

/// Data, operator and penalizer for one regularized reconstruction.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub data: &'a Signal,
    pub op: &'a BlurOperator,
    pub penalty: Penalty,
    /// TV smoothing parameter; ignored for Tikhonov.
    pub beta: f64,
    pub solver: SolverConfig,
}

impl Problem<'_> {
    /// Solves the regularized problem for one value of `alpha`.
    pub fn solve(&self, alpha: f64) -> Result<SolveReport> {
        match &self.penalty {
            Penalty::Tikhonov => solve_tikhonov(self.data, self.op, alpha),
            Penalty::TotalVariation => {
                let spec = PenalizerSpec::pure_tv(self.op.grid(), alpha, self.beta)?;
                solve(self.data, self.op, &spec, &self.solver, None)
            }
            Penalty::Mixed(theta) => {
                let spec = PenalizerSpec::new(alpha, alpha, theta.clone(), self.beta)?;
                solve(self.data, self.op, &spec, &self.solver, None)
            }
        }
    }
}

/// Residual `||A u_alpha - v||_h` of the regularized solution.
pub fn discrepancy(alpha: f64, problem: &Problem<'_>) -> Result<f64> {
    Ok(problem.solve(alpha)?.discrepancy)
}

#[derive(Debug, Clone)]
pub struct MorozovOutcome {
    pub alpha: f64,
    pub report: SolveReport,
    /// Number of interior bisection solves.
    pub bisections: usize,
    /// Whether `|discrepancy - tau delta| <= bisect_tol * tau delta` was reached.
    pub within_tolerance: bool,
    pub warnings: Vec<String>,
}

/// Bisection on `log10(alpha)` for `discrepancy(alpha) = tau * delta`.
///
/// Errors with [`Error::NoBracket`] unless the residual at the low end of the
/// range is below the target and the residual at the high end above it.
pub fn morozov_select(problem: &Problem<'_>, spec: &MorozovSpec) -> Result<MorozovOutcome> {
    spec.validate()?;
    let target = spec.target();
    let tol = spec.bisect_tol * target;
    let (mut lo, mut hi) = spec.log_alpha_range;

    let low_report = problem.solve(10f64.powf(lo))?;
    let high_report = problem.solve(10f64.powf(hi))?;
    if !(low_report.discrepancy < target && target < high_report.discrepancy) {
        return Err(Error::NoBracket {
            target,
            alpha_low: 10f64.powf(lo),
            low: low_report.discrepancy,
            alpha_high: 10f64.powf(hi),
            high: high_report.discrepancy,
        });
    }

    let mut warnings = Vec::new();
    let mut d_lo = low_report.discrepancy;
    let mut d_hi = high_report.discrepancy;
    // Closest endpoint so far, used if the tolerance is never met.
    let mut best = if target - d_lo <= d_hi - target {
        (lo, low_report)
    } else {
        (hi, high_report)
    };
    let mut bisections = 0;
    let mut within = (best.1.discrepancy - target).abs() <= tol;

    while !within && bisections < spec.max_bisections {
        let mid = 0.5 * (lo + hi);
        let report = problem.solve(10f64.powf(mid))?;
        bisections += 1;
        let d = report.discrepancy;
        if d < d_lo - 1e-6 || d > d_hi + 1e-6 {
            warnings.push(format!(
                "non-monotone discrepancy at log10(alpha)={mid:.6}: {d:.6e} outside [{d_lo:.6e}, {d_hi:.6e}]"
            ));
        }
        if (d - target).abs() < (best.1.discrepancy - target).abs() {
            best = (mid, report);
        }
        if (d - target).abs() <= tol {
            within = true;
            break;
        }
        if d < target {
            lo = mid;
            d_lo = d;
        } else {
            hi = mid;
            d_hi = d;
        }
    }

    let (log_alpha, report) = best;
    Ok(MorozovOutcome {
        alpha: 10f64.powf(log_alpha),
        report,
        bisections,
        within_tolerance: within,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blur::KernelSpec;
    use crate::penalty::default_beta;
    use crate::signals::{add_noise, noise_vector, synth_signal, NoiseSpec, SignalKind};
    use nalgebra::{DMatrix, DVector};

    struct Fixture {
        op: BlurOperator,
        v: Signal,
        delta: f64,
    }

    fn fixture(kind: SignalKind, seed: u64) -> Fixture {
        let grid = Grid::new(130).unwrap();
        let op = BlurOperator::build(grid, KernelSpec::new(0.05).unwrap());
        let g = op.apply(&synth_signal(kind, grid)).unwrap();
        let (v, sigma) = add_noise(&g, &NoiseSpec::new(0.01, seed).unwrap()).unwrap();
        Fixture {
            op,
            v,
            delta: noise_delta(sigma, grid),
        }
    }

    fn problem<'a>(fx: &'a Fixture, penalty: Penalty) -> Problem<'a> {
        Problem {
            data: &fx.v,
            op: &fx.op,
            penalty,
            beta: default_beta(&fx.v),
            solver: SolverConfig::default(),
        }
    }

    #[test]
    fn delta_matches_realized_noise_norm() {
        let grid = Grid::new(130).unwrap();
        let sigma = 0.01;
        let delta = noise_delta(sigma, grid);
        for seed in 0..10 {
            let eta = noise_vector(grid.len(), sigma, seed);
            let norm = (grid.h() * eta.iter().map(|e| e * e).sum::<f64>()).sqrt();
            assert!(
                (norm / delta - 1.0).abs() <= 0.15,
                "seed {seed}: {norm} vs {delta}"
            );
        }
    }

    #[test]
    fn tikhonov_discrepancy_matches_closed_form() {
        let fx = fixture(SignalKind::Example31, 0);
        let p = problem(&fx, Penalty::Tikhonov);
        let a = fx.op.matrix();
        let h = fx.op.grid().h();
        let v = DVector::from_column_slice(fx.v.values());
        for alpha in [1e-6, 1e-3, 1.0] {
            let lhs = a.transpose() * a + DMatrix::<f64>::identity(131, 131) * alpha;
            let u = lhs.lu().solve(&(a.transpose() * &v)).unwrap();
            let closed = (h * (a * u - &v).norm_squared()).sqrt();
            let d = discrepancy(alpha, &p).unwrap();
            assert!((d - closed).abs() <= 1e-8 * closed, "alpha={alpha}");
            let mixed0 = problem(
                &fx,
                Penalty::Mixed(WeightField::constant(fx.op.grid(), 0.0).unwrap()),
            );
            let dm = discrepancy(alpha, &mixed0).unwrap();
            assert!((dm - closed).abs() <= 1e-8 * closed, "alpha={alpha}");
        }
    }

    #[test]
    fn discrepancy_grows_with_alpha() {
        let fx = fixture(SignalKind::Example32, 1);
        let theta = WeightField::constant(fx.op.grid(), 0.5).unwrap();
        for penalty in [
            Penalty::Tikhonov,
            Penalty::TotalVariation,
            Penalty::Mixed(theta),
        ] {
            let p = problem(&fx, penalty);
            assert!(discrepancy(1e4, &p).unwrap() >= discrepancy(1e-4, &p).unwrap());
        }
    }

    #[test]
    fn small_alpha_fits_noiseless_small_system() {
        let grid = Grid::new(8).unwrap();
        let op = BlurOperator::build(grid, KernelSpec::new(0.05).unwrap());
        let v = op.apply(&synth_signal(SignalKind::Step, grid)).unwrap();
        let delta = 1e-6;
        let p = Problem {
            data: &v,
            op: &op,
            penalty: Penalty::Tikhonov,
            beta: 1e-4,
            solver: SolverConfig::default(),
        };
        assert!(discrepancy(1e-12, &p).unwrap() <= delta);
    }

    #[test]
    fn selection_meets_stopping_rule() {
        let fx = fixture(SignalKind::Example31, 2);
        let spec = MorozovSpec::new(fx.delta);
        let grid = fx.op.grid();
        let binary = WeightField::new(
            grid,
            grid.nodes()
                .iter()
                .map(|&t| if t <= 0.4 { 1.0 } else { 0.0 })
                .collect(),
        )
        .unwrap();
        for penalty in [
            Penalty::Tikhonov,
            Penalty::TotalVariation,
            Penalty::Mixed(binary),
        ] {
            let p = problem(&fx, penalty.clone());
            let out = morozov_select(&p, &spec).unwrap();
            let target = spec.target();
            assert!(out.within_tolerance, "{penalty:?}");
            assert!((out.report.discrepancy - target).abs() <= 1e-3 * target);
            // Determinism.
            let again = morozov_select(&p, &spec).unwrap();
            assert_eq!(again.alpha.to_bits(), out.alpha.to_bits());
        }
    }

    #[test]
    fn unbracketed_target_is_an_error() {
        let fx = fixture(SignalKind::Example31, 3);
        let p = problem(&fx, Penalty::Tikhonov);
        // The residual can never exceed ||v||, so a huge target is not bracketed.
        let spec = MorozovSpec::new(1e3);
        match morozov_select(&p, &spec) {
            Err(Error::NoBracket { low, high, .. }) => assert!(low < high),
            other => panic!("expected NoBracket, got {other:?}"),
        }
        // Noiseless-style tiny delta: residual at the low end already exceeds it.
        let grid = Grid::new(130).unwrap();
        let clean = fx
            .op
            .apply(&synth_signal(SignalKind::Example31, grid))
            .unwrap();
        let p = Problem {
            data: &clean,
            ..problem(&fx, Penalty::Tikhonov)
        };
        match morozov_select(&p, &MorozovSpec::new(1e-9)) {
            Err(Error::NoBracket { target, low, .. }) => assert!(low >= target),
            other => panic!("expected NoBracket, got {other:?}"),
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MorozovSpec::new(0.1).with_tau(0.9).validate().is_err());
        assert!(MorozovSpec::new(0.0).validate().is_err());
        let mut s = MorozovSpec::new(0.1);
        s.log_alpha_range = (2.0, 1.0);
        assert!(s.validate().is_err());
        assert_eq!(MorozovSpec::new(0.1).tau, 1.1);
    }
}
