//! Brute-force references for small instances.
//!
//! Nothing here shares code with the production path beyond the data types:
//! the weighted TV is recomputed from its dual form by exhaustion, and the
//! smoothed objective is minimized by multi-start damped Newton with its own
//! objective, gradient and Hessian.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::blur::BlurOperator;
use crate::error::{Error, Result};
use crate::penalty::{PenalizerSpec, WeightField};
use crate::signals::Signal;

pub const DUAL_MAX_N: usize = 10;
pub const BRUTE_MAX_N: usize = 8;
pub const BRUTE_RANDOM_STARTS: usize = 20;
pub const BRUTE_GRAD_TOL: f64 = 1e-10;
const BRUTE_SEED: u64 = 0x6f72_6163_6c65;
const MAX_NEWTON_STEPS: usize = 500;

/// `max over nu in L^n of sum_i (u[i+1] - u[i]) * thetabar_i * nu_i`, where `L`
/// has `grid_levels` equispaced points in `[-1, 1]`.
///
/// Exhaustive over all `grid_levels^n` vectors; refuses `n > 10`.
pub fn dual_sup_weighted(u: &Signal, theta: &WeightField, grid_levels: usize) -> Result<f64> {
    u.check_grid(theta.grid())?;
    let n = u.grid().n();
    if n > DUAL_MAX_N {
        return Err(Error::OracleTooLarge {
            n,
            limit: DUAL_MAX_N,
        });
    }
    if grid_levels < 3 {
        return Err(Error::param(
            "grid_levels",
            format!("need at least 3, got {grid_levels}"),
        ));
    }
    let levels: Vec<f64> = (0..grid_levels)
        .map(|k| -1.0 + 2.0 * k as f64 / (grid_levels - 1) as f64)
        .collect();
    let weighted: Vec<f64> = u
        .values()
        .windows(2)
        .zip(theta.edge_theta())
        .map(|(w, &tb)| (w[1] - w[0]) * tb)
        .collect();

    let mut digits = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let pairing: f64 = weighted
            .iter()
            .zip(&digits)
            .map(|(g, &k)| g * levels[k])
            .sum();
        best = best.max(pairing);
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(best);
            }
            digits[pos] += 1;
            if digits[pos] < grid_levels {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

/// One local descent run of [`brute_minimize_all`].
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub start: Vec<f64>,
    pub minimizer: Signal,
    pub objective: f64,
    pub grad_inf_norm: f64,
    pub steps: usize,
}

/// Global minimum of the smoothed objective for `n <= 8`: the best of
/// [`brute_minimize_all`].
pub fn brute_minimize(
    v: &Signal,
    op: &BlurOperator,
    spec: &PenalizerSpec,
) -> Result<(Signal, f64)> {
    let runs = brute_minimize_all(v, op, spec)?;
    let best = runs
        .into_iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .expect("at least two starts");
    Ok((best.minimizer, best.objective))
}

/// Damped Newton with backtracking from `0`, `v` and 20 seeded random starts,
/// each run until `||grad||_inf <= 1e-10` or no further decrease is possible.
pub fn brute_minimize_all(
    v: &Signal,
    op: &BlurOperator,
    spec: &PenalizerSpec,
) -> Result<Vec<OracleRun>> {
    let grid = op.grid();
    v.check_grid(grid)?;
    if grid.n() > BRUTE_MAX_N {
        return Err(Error::OracleTooLarge {
            n: grid.n(),
            limit: BRUTE_MAX_N,
        });
    }
    let problem = Smoothed::new(v, op, spec);
    let len = grid.len();
    let mut starts = vec![vec![0.0; len], v.values().to_vec()];
    let spread = v.range().max(1.0);
    let mut rng = ChaCha20Rng::seed_from_u64(BRUTE_SEED);
    for _ in 0..BRUTE_RANDOM_STARTS {
        starts.push(
            (0..len)
                .map(|_| v.min() + spread * rng.random_range(-1.0..2.0))
                .collect(),
        );
    }
    Ok(starts
        .into_iter()
        .map(|start| {
            let (u, objective, grad_inf_norm, steps) = problem.newton(start.clone());
            OracleRun {
                start,
                minimizer: Signal::from_vec_unchecked(grid, u),
                objective,
                grad_inf_norm,
                steps,
            }
        })
        .collect())
}

/// Dense form of the smoothed objective
/// `h |Au - v|^2 + a1 h sum (1 - theta) u^2 + a2 sum thetabar psi(Du)`.
struct Smoothed {
    a: DMatrix<f64>,
    v: DVector<f64>,
    h: f64,
    a1: f64,
    a2: f64,
    one_minus_theta: Vec<f64>,
    edge: Vec<f64>,
    beta: f64,
}

impl Smoothed {
    fn new(v: &Signal, op: &BlurOperator, spec: &PenalizerSpec) -> Self {
        let theta = spec.theta().theta();
        Self {
            a: op.matrix().clone(),
            v: DVector::from_column_slice(v.values()),
            h: op.grid().h(),
            a1: spec.alpha1(),
            a2: spec.alpha2(),
            one_minus_theta: theta.iter().map(|t| 1.0 - t).collect(),
            edge: theta.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
            beta: spec.beta(),
        }
    }

    fn value(&self, u: &DVector<f64>) -> f64 {
        let r = &self.a * u - &self.v;
        let fit = self.h * r.norm_squared();
        let l2: f64 = self.h
            * u.iter()
                .zip(&self.one_minus_theta)
                .map(|(x, w)| w * x * x)
                .sum::<f64>();
        let tv: f64 = (0..self.edge.len())
            .map(|i| {
                let d = u[i + 1] - u[i];
                self.edge[i] * ((d * d + self.beta * self.beta).sqrt() - self.beta)
            })
            .sum();
        fit + self.a1 * l2 + self.a2 * tv
    }

    fn grad_hess(&self, u: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let len = u.len();
        let r = &self.a * u - &self.v;
        let mut g = self.a.tr_mul(&r) * (2.0 * self.h);
        let mut hess = self.a.tr_mul(&self.a) * (2.0 * self.h);
        for j in 0..len {
            g[j] += 2.0 * self.a1 * self.h * self.one_minus_theta[j] * u[j];
            hess[(j, j)] += 2.0 * self.a1 * self.h * self.one_minus_theta[j];
        }
        let b2 = self.beta * self.beta;
        for i in 0..self.edge.len() {
            let d = u[i + 1] - u[i];
            let s = (d * d + b2).sqrt();
            let first = self.a2 * self.edge[i] * d / s;
            let second = self.a2 * self.edge[i] * b2 / (s * s * s);
            g[i] -= first;
            g[i + 1] += first;
            hess[(i, i)] += second;
            hess[(i + 1, i + 1)] += second;
            hess[(i, i + 1)] -= second;
            hess[(i + 1, i)] -= second;
        }
        (g, hess)
    }

    /// Returns `(u, objective, ||grad||_inf, steps)`.
    fn newton(&self, start: Vec<f64>) -> (Vec<f64>, f64, f64, usize) {
        let mut u = DVector::from_vec(start);
        let mut f = self.value(&u);
        let mut steps = 0;
        loop {
            let (g, hess) = self.grad_hess(&u);
            let gnorm = g.amax();
            if gnorm <= BRUTE_GRAD_TOL || steps == MAX_NEWTON_STEPS {
                return (u.as_slice().to_vec(), f, gnorm, steps);
            }
            steps += 1;
            let dir = match hess.clone().cholesky() {
                Some(ch) => -ch.solve(&g),
                None => -g.clone(),
            };
            let slope = g.dot(&dir);
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-20 {
                let trial = &u + &dir * t;
                let ft = self.value(&trial);
                if ft <= f + 1e-4 * t * slope {
                    accepted = Some((trial, ft));
                    break;
                }
                t *= 0.5;
            }
            match accepted {
                Some((trial, ft)) => {
                    u = trial;
                    f = ft;
                }
                // Round-off floor: the objective can no longer be decreased.
                None => return (u.as_slice().to_vec(), f, gnorm, steps),
            }
        }
    }
}
