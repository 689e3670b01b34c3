//! Construction of the spatial weight `theta`.
//!
//! Binary masks encode prior knowledge of where the signal is piecewise
//! constant. The data-driven weight needs no prior: it smooths the gradient
//! modulus of a Tikhonov reconstruction with a Gaussian and rescales it to
//! `[0, 1]`, so that `theta` is large near edges (TV acts there) and small
//! where the reconstruction is flat or smooth (L2 acts there).

use crate::blur::{BlurOperator, KernelSpec};
use crate::error::{Error, Result};
use crate::penalty::WeightField;
use crate::regparam::{morozov_select, MorozovSpec, Penalty, Problem};
use crate::signals::{Grid, Signal};
use crate::solver::SolverConfig;

/// How to obtain `theta` for a reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaRecipe {
    /// 1 on `[a, b]`, 0 elsewhere.
    BinaryInterval {
        a: f64,
        b: f64,
    },
    /// 1 on the union of the intervals, 0 elsewhere.
    Indicator(Vec<(f64, f64)>),
    /// Gaussian-smoothed Tikhonov gradient modulus; `sigma_smooth = None`
    /// uses the blur kernel width.
    DataDriven {
        sigma_smooth: Option<f64>,
    },
    Constant(f64),
}

/// `theta_j = 1` if `a <= t_j <= b`, else 0.
pub fn build_binary(grid: Grid, a: f64, b: f64) -> Result<WeightField> {
    build_indicator(grid, &[(a, b)])
}

pub fn build_indicator(grid: Grid, intervals: &[(f64, f64)]) -> Result<WeightField> {
    for &(a, b) in intervals {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidInterval { a, b });
        }
    }
    let theta = grid
        .nodes()
        .into_iter()
        .map(|t| {
            if intervals.iter().any(|&(a, b)| a <= t && t <= b) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    WeightField::new(grid, theta)
}

#[derive(Debug, Clone)]
pub struct DataDrivenTheta {
    pub theta: WeightField,
    /// Morozov-selected parameter of the Tikhonov pre-solve.
    pub tikhonov_alpha: f64,
    /// The Tikhonov pre-solve itself.
    pub presolve: Signal,
    pub warnings: Vec<String>,
}

/// Data-driven weight:
///
/// 1. `u` = Tikhonov solution with Morozov-selected `alpha`;
/// 2. `m_j = |u_{j+1} - u_j| / h`, with the last node repeating the previous one;
/// 3. `s` = `m` convolved with a Gaussian of std `sigma_smooth` (same
///    reflexive construction as the blur operator);
/// 4. `theta = (s - min s) / (max s - min s)`, or `theta == 0` if `s` is flat.
pub fn build_data_driven(
    v: &Signal,
    op: &BlurOperator,
    sigma_smooth: f64,
    morozov: &MorozovSpec,
) -> Result<DataDrivenTheta> {
    let problem = Problem {
        data: v,
        op,
        penalty: Penalty::Tikhonov,
        beta: 1.0,
        solver: SolverConfig::default(),
    };
    let selection = morozov_select(&problem, morozov)?;
    let mut warnings = selection.warnings;
    let grid = op.grid();
    let theta =
        theta_from_reconstruction(&selection.report.minimizer, sigma_smooth, &mut warnings)?;
    debug_assert_eq!(theta.grid(), grid);
    Ok(DataDrivenTheta {
        theta,
        tikhonov_alpha: selection.alpha,
        presolve: selection.report.minimizer,
        warnings,
    })
}

const FLAT_TOL: f64 = 1e-10;

/// Steps 2-4 of [`build_data_driven`] applied to a given reconstruction.
pub fn theta_from_reconstruction(
    u: &Signal,
    sigma_smooth: f64,
    warnings: &mut Vec<String>,
) -> Result<WeightField> {
    let grid = u.grid();
    let h = grid.h();
    let mut modulus: Vec<f64> = u
        .values()
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / h)
        .collect();
    modulus.push(*modulus.last().expect("grid has at least two nodes"));

    let smoother = BlurOperator::build(grid, KernelSpec::new(sigma_smooth)?);
    let smoothed = smoother.mul(&modulus);
    let lo = smoothed.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = smoothed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Round-off in the pre-solve leaves O(eps) moduli on constant data.
    let scale = u.values().iter().fold(0.0f64, |m, x| m.max(x.abs())) / h;
    let theta = if hi - lo > FLAT_TOL * scale {
        smoothed
            .iter()
            .map(|s| ((s - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect()
    } else {
        warnings.push("flat gradient modulus; using theta = 0".to_string());
        vec![0.0; grid.len()]
    };
    WeightField::new(grid, theta)
}

impl ThetaRecipe {
    /// Builds the weight for data `v`. Only the data-driven recipe looks at
    /// the data (and needs `morozov`).
    pub fn build(
        &self,
        v: &Signal,
        op: &BlurOperator,
        morozov: &MorozovSpec,
    ) -> Result<DataDrivenOrFixed> {
        let grid = op.grid();
        Ok(match self {
            ThetaRecipe::BinaryInterval { a, b } => {
                DataDrivenOrFixed::Fixed(build_binary(grid, *a, *b)?)
            }
            ThetaRecipe::Indicator(intervals) => {
                DataDrivenOrFixed::Fixed(build_indicator(grid, intervals)?)
            }
            ThetaRecipe::Constant(c) => DataDrivenOrFixed::Fixed(WeightField::constant(grid, *c)?),
            ThetaRecipe::DataDriven { sigma_smooth } => {
                let sigma = sigma_smooth.unwrap_or(op.kernel().sigma_b());
                DataDrivenOrFixed::DataDriven(build_data_driven(v, op, sigma, morozov)?)
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum DataDrivenOrFixed {
    Fixed(WeightField),
    DataDriven(DataDrivenTheta),
}

impl DataDrivenOrFixed {
    pub fn weight(&self) -> &WeightField {
        match self {
            DataDrivenOrFixed::Fixed(w) => w,
            DataDrivenOrFixed::DataDriven(d) => &d.theta,
        }
    }

    pub fn into_weight(self) -> WeightField {
        match self {
            DataDrivenOrFixed::Fixed(w) => w,
            DataDrivenOrFixed::DataDriven(d) => d.theta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::{tv_seminorm, weighted_tv};
    use crate::regparam::noise_delta;
    use crate::signals::{add_noise, synth_signal, NoiseSpec, SignalKind};

    #[test]
    fn binary_mask_counts() {
        let g = Grid::new(130).unwrap();
        let w = build_binary(g, 0.3, 0.65).unwrap();
        let brute = (0..=130).filter(|&j| {
            let t = j as f64 / 130.0;
            (0.3..=0.65).contains(&t)
        });
        assert_eq!(w.theta().iter().sum::<f64>(), brute.count() as f64);
        assert_eq!(w.theta().iter().sum::<f64>(), 46.0);
        assert!(w.theta().iter().all(|&x| x == 0.0 || x == 1.0));
    }

    #[test]
    fn full_interval_gives_ones_and_matches_tv() {
        let g = Grid::new(40).unwrap();
        let w = build_binary(g, 0.0, 1.0).unwrap();
        assert!(w.theta().iter().all(|&x| x == 1.0));
        let u = synth_signal(SignalKind::Example32, g);
        assert_eq!(weighted_tv(&u, &w).unwrap(), tv_seminorm(&u));
    }

    #[test]
    fn example31_mask() {
        let g = Grid::new(130).unwrap();
        let w = build_binary(g, 0.0, 0.4).unwrap();
        for (j, &x) in w.theta().iter().enumerate() {
            let t = g.node(j);
            assert_eq!(x, if t <= 0.4 { 1.0 } else { 0.0 });
        }
        assert_eq!(*w.theta().last().unwrap(), 0.0);
    }

    #[test]
    fn invalid_intervals() {
        let g = Grid::new(10).unwrap();
        assert!(matches!(
            build_binary(g, 0.5, 0.5),
            Err(Error::InvalidInterval { .. })
        ));
        assert!(build_binary(g, 0.6, 0.2).is_err());
        assert!(build_binary(g, -0.1, 0.2).is_err());
        assert!(build_binary(g, 0.1, 1.2).is_err());
    }

    #[test]
    fn indicator_union() {
        let g = Grid::new(10).unwrap();
        let w = build_indicator(g, &[(0.0, 0.2), (0.7, 0.8)]).unwrap();
        assert_eq!(w.one_set(), vec![0, 1, 2, 7, 8]);
    }

    fn example_data(kind: SignalKind, seed: u64) -> (BlurOperator, Signal, MorozovSpec) {
        let g = Grid::new(130).unwrap();
        let op = BlurOperator::build(g, KernelSpec::new(0.05).unwrap());
        let clean = op.apply(&synth_signal(kind, g)).unwrap();
        let (v, sigma) = add_noise(&clean, &NoiseSpec::new(0.01, seed).unwrap()).unwrap();
        (op, v, MorozovSpec::new(noise_delta(sigma, g)))
    }

    #[test]
    fn data_driven_theta_is_normalized_and_deterministic() {
        let (op, v, morozov) = example_data(SignalKind::Example31, 0);
        let a = build_data_driven(&v, &op, 0.05, &morozov).unwrap();
        let theta = a.theta.theta();
        let lo = theta.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 1.0);
        let b = build_data_driven(&v, &op, 0.05, &morozov).unwrap();
        assert_eq!(a.theta, b.theta);
    }

    #[test]
    fn data_driven_theta_peaks_at_largest_jump() {
        // The largest jump of the first test signal is at t = 0.1.
        for seed in 0..5 {
            let (op, v, morozov) = example_data(SignalKind::Example31, seed);
            let d = build_data_driven(&v, &op, 0.05, &morozov).unwrap();
            let theta = d.theta.theta();
            let argmax = (0..theta.len())
                .max_by(|&i, &j| theta[i].total_cmp(&theta[j]))
                .unwrap();
            let t = op.grid().node(argmax);
            assert!((t - 0.1).abs() <= 0.05, "seed {seed}: peak at {t}");
        }
    }

    #[test]
    fn flat_reconstruction_gives_zero_theta() {
        let g = Grid::new(20).unwrap();
        let mut warnings = Vec::new();
        let w =
            theta_from_reconstruction(&Signal::from_fn(g, |_| 0.7), 0.05, &mut warnings).unwrap();
        assert!(w.theta().iter().all(|&x| x == 0.0));
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn constant_data_gives_zero_theta() {
        let g = Grid::new(130).unwrap();
        let op = BlurOperator::build(g, KernelSpec::new(0.05).unwrap());
        let v = Signal::from_fn(g, |_| 1.0);
        let morozov = MorozovSpec::new(noise_delta(0.01, g));
        let d = build_data_driven(&v, &op, 0.05, &morozov).unwrap();
        assert!(d.theta.theta().iter().all(|&x| x == 0.0));
        assert!(!d.warnings.is_empty());
    }

    #[test]
    fn recipes_build() {
        let (op, v, morozov) = example_data(SignalKind::Example32, 1);
        let fixed = ThetaRecipe::BinaryInterval { a: 0.3, b: 0.65 }
            .build(&v, &op, &morozov)
            .unwrap();
        assert!(matches!(fixed, DataDrivenOrFixed::Fixed(_)));
        let c = ThetaRecipe::Constant(0.25)
            .build(&v, &op, &morozov)
            .unwrap();
        assert!(c.weight().theta().iter().all(|&x| x == 0.25));
        assert!(ThetaRecipe::Constant(1.5).build(&v, &op, &morozov).is_err());
        let dd = ThetaRecipe::DataDriven { sigma_smooth: None }
            .build(&v, &op, &morozov)
            .unwrap();
        match dd {
            DataDrivenOrFixed::DataDriven(d) => assert!(d.tikhonov_alpha > 0.0),
            _ => panic!("expected data-driven"),
        }
    }
}
