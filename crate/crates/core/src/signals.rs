//! Uniform grids on `[0, 1]`, sampled signals, synthetic test signals and
//! seeded Gaussian noise.
//!
//! Noise is drawn from a ChaCha20 stream (`rand_chacha::ChaCha20Rng`) seeded
//! with `seed_from_u64(seed)` and mapped through the `rand_distr` ziggurat
//! standard normal. Equal `(clean, level, seed)` always give bit-identical
//! output; this is part of the public contract.

use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

/// Uniform grid `t_j = j / n`, `j = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    /// Number of subintervals.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Node `t_j`, computed as `j / n` so that the endpoints are exactly 0 and 1.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Samples of a function at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: Grid,
    values: Vec<f64>,
}

impl Signal {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        grid.check_len(values.len())?;
        if let Some(j) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::param(
                "values",
                format!("sample {j} is not finite ({})", values[j]),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().into_iter().map(&mut f).collect(),
        }
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    pub(crate) fn check_grid(&self, grid: Grid) -> Result<()> {
        if self.grid != grid {
            return Err(Error::Dimension {
                expected: grid.len(),
                actual: self.len(),
            });
        }
        Ok(())
    }

    /// Writes `t,value` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let t = self.grid.nodes();
        io::write_columns_file(path, &["t", "value"], &[&t, &self.values])
    }

    /// Reads a `t,value` file; the grid is inferred from the row count.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let (header, cols) = io::read_columns_file(path)?;
        let values = io::column(path, &header, &cols, "value")?.to_vec();
        let grid = Grid::new(values.len().saturating_sub(1))?;
        Signal::new(grid, values)
    }
}

/// Built-in test signals.
///
/// `Example31` and `Example32` are surrogates with the qualitative shape of
/// the classic L2/BV test problems; their exact amplitudes are this crate's
/// choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// Piecewise constant on `[0, 0.4]`, Gaussian bump on `(0.4, 1]`.
    Example31,
    /// Smooth on `[0, 0.3]` and `(0.65, 1]`, piecewise constant with three
    /// jumps in between.
    Example32,
    /// Unit step at `t = 0.5`.
    Step,
    /// Single Gaussian bump centred at 0.5.
    Bump,
    /// Identically 1.
    Constant,
}

impl SignalKind {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            SignalKind::Example31 => example31(t),
            SignalKind::Example32 => example32(t),
            SignalKind::Step => {
                if t < 0.5 {
                    0.0
                } else {
                    1.0
                }
            }
            SignalKind::Bump => (-(t - 0.5).powi(2) / (2.0 * 0.1f64.powi(2))).exp(),
            SignalKind::Constant => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignalKind::Example31 => "example31",
            SignalKind::Example32 => "example32",
            SignalKind::Step => "step",
            SignalKind::Bump => "bump",
            SignalKind::Constant => "constant",
        }
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "example31" => SignalKind::Example31,
            "example32" => SignalKind::Example32,
            "step" => SignalKind::Step,
            "bump" => SignalKind::Bump,
            "constant" => SignalKind::Constant,
            other => return Err(Error::param("signal", format!("unknown kind `{other}`"))),
        })
    }
}

fn example31(t: f64) -> f64 {
    if t <= 0.4 {
        if (0.10..=0.25).contains(&t) {
            1.0
        } else if t > 0.25 {
            0.4
        } else {
            0.0
        }
    } else {
        0.8 * (-(t - 0.7).powi(2) / (2.0 * 0.12f64.powi(2))).exp()
    }
}

// The last piece starts at the top of its bump so that the jump at 0.65 is
// as visible as the other two.
fn example32(t: f64) -> f64 {
    if t <= 0.3 {
        0.9 * (std::f64::consts::PI * t / 0.3).sin().powi(2)
    } else if t <= 0.45 {
        1.0
    } else if t <= 0.65 {
        0.2
    } else {
        0.2 + 0.6 * (-(t - 0.65).powi(2) / (2.0 * 0.07f64.powi(2))).exp()
    }
}

pub fn synth_signal(kind: SignalKind, grid: Grid) -> Signal {
    Signal::from_fn(grid, |t| kind.eval(t))
}

/// Relative additive Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Noise std as a fraction of the clean signal's range.
    pub relative_level: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(relative_level: f64, seed: u64) -> Result<Self> {
        if !(relative_level > 0.0 && relative_level < 1.0) {
            return Err(Error::param(
                "relative_level",
                format!("must lie in (0, 1), got {relative_level}"),
            ));
        }
        Ok(Self {
            relative_level,
            seed,
        })
    }
}

/// Returns `clean + eta` together with the std `sigma` of `eta`,
/// `sigma = relative_level * range(clean)`.
pub fn add_noise(clean: &Signal, spec: &NoiseSpec) -> Result<(Signal, f64)> {
    let range = clean.range();
    if range <= 0.0 {
        return Err(Error::DegenerateRange);
    }
    let sigma = spec.relative_level * range;
    let eta = noise_vector(clean.len(), sigma, spec.seed);
    let values = clean
        .values()
        .iter()
        .zip(&eta)
        .map(|(c, e)| c + e)
        .collect();
    Ok((Signal::from_vec_unchecked(clean.grid(), values), sigma))
}

/// The raw noise realization used by [`add_noise`].
pub fn noise_vector(len: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect()
}

/// Sum of absolute adjacent differences.
pub(crate) fn discrete_tv(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
