//! Discrete penalizers and the mixed functional
//!
//! ```text
//! F(u) = ||A u - v||_h^2 + alpha1 * ||sqrt(1 - theta) u||_h^2 + alpha2 * W_theta(u)
//! ```
//!
//! where `||x||_h^2 = h * sum x_j^2` and the weighted total variation is
//! `W_theta(u) = sum_i theta_edge[i] * |u[i+1] - u[i]|`. The TV terms carry no
//! factor of `h` (`|u'| dx ~ |du|`), so `alpha2` keeps its meaning as `n`
//! changes. Edge weights are the mean of the two endpoint weights.
//!
//! The smooth surrogate replaces `|d|` by `psi(d) = sqrt(d^2 + beta^2) - beta`,
//! which satisfies `0 <= |d| - psi(d) <= beta`.

use std::path::Path;

use crate::blur::BlurOperator;
use crate::error::{Error, Result};
use crate::io;
use crate::signals::{discrete_tv, Grid, Signal};

/// Spatial weight `theta` with values in `[0, 1]`. Where it is 1 the
/// penalty is pure TV, where it is 0 it is pure L2.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    grid: Grid,
    theta: Vec<f64>,
    edge_theta: Vec<f64>,
}

impl WeightField {
    pub fn new(grid: Grid, theta: Vec<f64>) -> Result<Self> {
        grid.check_len(theta.len())?;
        if let Some(j) = theta.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::param(
                "theta",
                format!("value {} at node {j} is outside [0, 1]", theta[j]),
            ));
        }
        let edge_theta = theta.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self {
            grid,
            theta,
            edge_theta,
        })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.len()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Per-edge weights, length `n`.
    pub fn edge_theta(&self) -> &[f64] {
        &self.edge_theta
    }

    /// Nodes where `theta == 0` (pure L2 region).
    pub fn zero_set(&self) -> Vec<usize> {
        (0..self.theta.len())
            .filter(|&j| self.theta[j] == 0.0)
            .collect()
    }

    /// Nodes where `theta == 1` (pure TV region).
    pub fn one_set(&self) -> Vec<usize> {
        (0..self.theta.len())
            .filter(|&j| self.theta[j] == 1.0)
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let t = self.grid.nodes();
        io::write_columns_file(path, &["t", "theta"], &[&t, &self.theta])
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let (header, cols) = io::read_columns_file(path)?;
        let theta = io::column(path, &header, &cols, "theta")?.to_vec();
        let grid = Grid::new(theta.len().saturating_sub(1))?;
        Self::new(grid, theta)
    }

    fn check_grid(&self, grid: Grid) -> Result<()> {
        if self.grid != grid {
            return Err(Error::Dimension {
                expected: grid.len(),
                actual: self.theta.len(),
            });
        }
        Ok(())
    }
}

/// Parameters of the mixed functional.
#[derive(Debug, Clone, PartialEq)]
pub struct PenalizerSpec {
    alpha1: f64,
    alpha2: f64,
    theta: WeightField,
    beta: f64,
}

impl PenalizerSpec {
    pub fn new(alpha1: f64, alpha2: f64, theta: WeightField, beta: f64) -> Result<Self> {
        for (name, x) in [("alpha1", alpha1), ("alpha2", alpha2), ("beta", beta)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {x}")));
            }
        }
        Ok(Self {
            alpha1,
            alpha2,
            theta,
            beta,
        })
    }

    /// `theta == 1` everywhere with the L2 term switched off.
    pub fn pure_tv(grid: Grid, alpha: f64, beta: f64) -> Result<Self> {
        let mut spec = Self::new(1.0, alpha, WeightField::constant(grid, 1.0)?, beta)?;
        spec.alpha1 = 0.0;
        Ok(spec)
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn theta(&self) -> &WeightField {
        &self.theta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> Grid {
        self.theta.grid
    }
}

/// Default TV smoothing: `1e-4` times the data range (with a floor for flat data).
pub fn default_beta(v: &Signal) -> f64 {
    let range = v.range();
    if range > 0.0 {
        1e-4 * range
    } else {
        1e-4
    }
}

/// Total variation `sum |u[i+1] - u[i]|`.
pub fn tv_seminorm(u: &Signal) -> f64 {
    discrete_tv(u.values())
}

pub fn weighted_tv(u: &Signal, theta: &WeightField) -> Result<f64> {
    theta.check_grid(u.grid())?;
    Ok(weighted_tv_raw(u.values(), theta.edge_theta()))
}

pub(crate) fn weighted_tv_raw(u: &[f64], edge_theta: &[f64]) -> f64 {
    u.windows(2)
        .zip(edge_theta)
        .map(|(w, t)| t * (w[1] - w[0]).abs())
        .sum()
}

/// `h * sum (1 - theta_j) u_j^2`.
pub fn weighted_l2_sq(u: &Signal, theta: &WeightField) -> Result<f64> {
    theta.check_grid(u.grid())?;
    Ok(weighted_l2_raw(u.values(), theta.theta(), u.grid().h()))
}

fn weighted_l2_raw(u: &[f64], theta: &[f64], h: f64) -> f64 {
    h * u
        .iter()
        .zip(theta)
        .map(|(x, t)| (1.0 - t) * x * x)
        .sum::<f64>()
}

fn smoothed_abs(d: f64, beta: f64) -> f64 {
    // sqrt(d^2 + b^2) - b, written to avoid cancellation for |d| << b.
    d * d / ((d * d + beta * beta).sqrt() + beta)
}

fn check_inputs(u: &Signal, v: &Signal, op: &BlurOperator, spec: &PenalizerSpec) -> Result<()> {
    let grid = op.grid();
    u.check_grid(grid)?;
    v.check_grid(grid)?;
    spec.theta.check_grid(grid)
}

/// Value of the mixed functional; `smoothed` selects `psi_beta` for the TV term.
pub fn objective(
    u: &Signal,
    v: &Signal,
    op: &BlurOperator,
    spec: &PenalizerSpec,
    smoothed: bool,
) -> Result<f64> {
    check_inputs(u, v, op, spec)?;
    Ok(objective_raw(u.values(), v.values(), op, spec, smoothed))
}

pub(crate) fn objective_raw(
    u: &[f64],
    v: &[f64],
    op: &BlurOperator,
    spec: &PenalizerSpec,
    smoothed: bool,
) -> f64 {
    let h = op.grid().h();
    let fidelity = residual_norm_sq(u, v, op);
    let l2 = if spec.alpha1 > 0.0 {
        spec.alpha1 * weighted_l2_raw(u, spec.theta.theta(), h)
    } else {
        0.0
    };
    let tv = if smoothed {
        u.windows(2)
            .zip(spec.theta.edge_theta())
            .map(|(w, t)| t * smoothed_abs(w[1] - w[0], spec.beta))
            .sum()
    } else {
        weighted_tv_raw(u, spec.theta.edge_theta())
    };
    fidelity + l2 + spec.alpha2 * tv
}

/// `||A u - v||_h^2`.
pub(crate) fn residual_norm_sq(u: &[f64], v: &[f64], op: &BlurOperator) -> f64 {
    let h = op.grid().h();
    let au = op.mul(u);
    h * au.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
}

/// Gradient of the smoothed functional:
/// `2h A^T (A u - v) + 2 alpha1 h (1 - theta) u + alpha2 L^T (w * L u)` with
/// `L` the forward difference and `w_i = theta_edge[i] / sqrt((L u)_i^2 + beta^2)`.
pub fn gradient(u: &Signal, v: &Signal, op: &BlurOperator, spec: &PenalizerSpec) -> Result<Signal> {
    check_inputs(u, v, op, spec)?;
    Ok(Signal::from_vec_unchecked(
        op.grid(),
        gradient_raw(u.values(), v.values(), op, spec),
    ))
}

pub(crate) fn gradient_raw(
    u: &[f64],
    v: &[f64],
    op: &BlurOperator,
    spec: &PenalizerSpec,
) -> Vec<f64> {
    let h = op.grid().h();
    let residual: Vec<f64> = op.mul(u).iter().zip(v).map(|(a, b)| a - b).collect();
    let mut grad: Vec<f64> = op
        .mul_t(&residual)
        .into_iter()
        .map(|x| 2.0 * h * x)
        .collect();
    if spec.alpha1 > 0.0 {
        for ((g, x), t) in grad.iter_mut().zip(u).zip(spec.theta.theta()) {
            *g += 2.0 * spec.alpha1 * h * (1.0 - t) * x;
        }
    }
    for (i, t) in spec.theta.edge_theta().iter().enumerate() {
        let d = u[i + 1] - u[i];
        let flux = spec.alpha2 * t * d / (d * d + spec.beta * spec.beta).sqrt();
        grad[i + 1] += flux;
        grad[i] -= flux;
    }
    grad
}

/// Second directional derivative `dir^T H(u) dir` of the smoothed functional.
pub fn curvature(
    u: &Signal,
    direction: &Signal,
    op: &BlurOperator,
    spec: &PenalizerSpec,
) -> Result<f64> {
    let grid = op.grid();
    u.check_grid(grid)?;
    direction.check_grid(grid)?;
    spec.theta.check_grid(grid)?;
    let h = grid.h();
    let (u, p) = (u.values(), direction.values());
    let ap = op.mul(p);
    let mut q = 2.0 * h * ap.iter().map(|x| x * x).sum::<f64>();
    q += 2.0
        * spec.alpha1
        * h
        * p.iter()
            .zip(spec.theta.theta())
            .map(|(x, t)| (1.0 - t) * x * x)
            .sum::<f64>();
    let b2 = spec.beta * spec.beta;
    for (i, t) in spec.theta.edge_theta().iter().enumerate() {
        let d = u[i + 1] - u[i];
        let dp = p[i + 1] - p[i];
        q += spec.alpha2 * t * b2 / (d * d + b2).powf(1.5) * dp * dp;
    }
    Ok(q)
}
