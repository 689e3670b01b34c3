//! Dense discretization of Gaussian convolution on `[0, 1]` with reflexive
//! (mirror) boundary conditions.
//!
//! The convolution `v(t) = ∫ k(t, s) u(s) ds` is collocated at the grid
//! nodes and integrated with the rectangle rule over the mirror-extended
//! signal. Quadrature nodes `s_m = m h` outside the grid are folded back by
//! mirroring about the outer cell edges `-h/2` and `1 + h/2` (index
//! `m -> -1 - m` and `m -> 2n + 1 - m`, repeatedly for very wide kernels),
//! and their weight is accumulated into the interior column they land on.
//! This half-sample mirror makes `A` a symmetric Toeplitz-plus-Hankel
//! matrix. The
//! quadrature weights are normalized to unit discrete mass, so every row
//! sums to one and constants pass through unchanged even when `sigma_b` is
//! below the grid spacing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::io::fmt_real;
use crate::signals::{Grid, Signal};

/// Kernel half-width in standard deviations; the Gaussian tail beyond it
/// holds less than `1e-15` of the mass.
const TRUNCATION_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    sigma_b: f64,
}

impl KernelSpec {
    pub fn new(sigma_b: f64) -> Result<Self> {
        if !(sigma_b > 0.0 && sigma_b.is_finite()) {
            return Err(Error::param(
                "sigma_b",
                format!("must be positive, got {sigma_b}"),
            ));
        }
        Ok(Self { sigma_b })
    }

    pub fn sigma_b(&self) -> f64 {
        self.sigma_b
    }
}

/// `k(t, s) = exp(-(t - s)^2 / (2 sigma_b^2)) / (sqrt(2 pi) sigma_b)`.
///
/// Values below `1e-300` are flushed to zero.
pub fn kernel_eval(spec: &KernelSpec, t: f64, s: f64) -> f64 {
    let sigma = spec.sigma_b;
    let z = (t - s) / sigma;
    let value = (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    if value < 1e-300 {
        0.0
    } else {
        value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Reflexive,
}

/// The forward operator `A` with `A f = g`.
#[derive(Debug, Clone)]
pub struct BlurOperator {
    grid: Grid,
    kernel: KernelSpec,
    boundary: Boundary,
    matrix: DMatrix<f64>,
    gram: OnceLock<DMatrix<f64>>,
}

/// Maps an integer quadrature index onto `0..=n` by repeated half-sample
/// mirroring.
fn fold_index(m: i64, n: i64) -> usize {
    let period = 2 * (n + 1);
    let r = m.rem_euclid(period);
    (if r > n { period - 1 - r } else { r }) as usize
}

impl BlurOperator {
    pub fn build(grid: Grid, kernel: KernelSpec) -> Self {
        let n = grid.n() as i64;
        let h = grid.h();
        let reach = (TRUNCATION_SIGMAS * kernel.sigma_b / h).ceil() as i64;
        // Quadrature weights depend only on the offset i - m.
        let weights: Vec<f64> = (-reach..=reach)
            .map(|d| h * kernel_eval(&kernel, d as f64 * h, 0.0))
            .collect();
        let mass: f64 = weights.iter().sum();

        let size = grid.len();
        let mut matrix = DMatrix::zeros(size, size);
        for i in 0..size as i64 {
            for (k, w) in weights.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let m = i - (k as i64 - reach);
                matrix[(i as usize, fold_index(m, n))] += w / mass;
            }
        }
        Self {
            grid,
            kernel,
            boundary: Boundary::Reflexive,
            matrix,
            gram: OnceLock::new(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `A^T A`, computed on first use.
    pub fn gram(&self) -> &DMatrix<f64> {
        self.gram.get_or_init(|| self.matrix.tr_mul(&self.matrix))
    }

    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        f.check_grid(self.grid)?;
        Ok(Signal::from_vec_unchecked(self.grid, self.mul(f.values())))
    }

    pub fn apply_adjoint(&self, r: &Signal) -> Result<Signal> {
        r.check_grid(self.grid)?;
        Ok(Signal::from_vec_unchecked(
            self.grid,
            self.mul_t(r.values()),
        ))
    }

    pub(crate) fn mul(&self, x: &[f64]) -> Vec<f64> {
        let y = &self.matrix * DVector::from_column_slice(x);
        y.data.into()
    }

    pub(crate) fn mul_t(&self, x: &[f64]) -> Vec<f64> {
        let y = self.matrix.tr_mul(&DVector::from_column_slice(x));
        y.data.into()
    }

    /// Dumps the matrix as `i,j,value` rows in row-major order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
            writeln!(out, "i,j,value")?;
            for i in 0..self.matrix.nrows() {
                for j in 0..self.matrix.ncols() {
                    writeln!(out, "{i},{j},{}", fmt_real(self.matrix[(i, j)]))?;
                }
            }
            out.flush()
        };
        write(&mut out).map_err(|e| Error::io(path, e))
    }
}
