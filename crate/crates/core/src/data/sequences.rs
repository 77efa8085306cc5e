//! Synthetic collinear sequences and their windowing.
//!
//! Six independent sources are drawn from six different distributions and
//! six more rows are fixed linear combinations of them, so the twelve rows
//! span exactly six dimensions.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::prng::{DistSpec, Prng};

pub const SEQUENCE_LEN: usize = 2000;
pub const SOURCE_COUNT: usize = 6;
pub const SEQUENCE_COUNT: usize = 12;

/// The six sources, in row order.
pub const SOURCES: [DistSpec; SOURCE_COUNT] = [
    DistSpec::Poisson { lambda: 3.0 },
    DistSpec::Binomial { n: 10, p: 0.6 },
    DistSpec::Laplace { loc: -1.0, scale: 1.0 },
    DistSpec::Normal { mean: 0.5, std: 1.0 },
    DistSpec::Exponential { scale: 2.0 },
    DistSpec::Uniform { lo: -2.0, hi: 2.0 },
];

/// Rows 6..12 as `(source row, coefficient)` triples, summed in listed order.
pub const MIXING: [[(usize, f64); 3]; SOURCE_COUNT] = [
    [(0, 0.25), (1, 0.75), (2, 0.50)],
    [(1, 0.30), (2, 0.70), (3, 0.50)],
    [(2, 0.45), (3, 0.55), (4, 0.35)],
    [(3, 0.60), (4, 0.40), (5, 0.20)],
    [(4, 0.50), (5, 0.35), (0, 0.45)],
    [(5, 0.40), (0, 0.10), (1, 0.60)],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    /// `SEQUENCE_COUNT` rows of equal length.
    pub sequences: Vec<Vec<f64>>,
}

/// Per-row affine transform applied by [`SequenceSet::standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl SequenceSet {
    /// Draws the sources row by row from one generator seeded with `seed`,
    /// then mixes.
    pub fn generate(seed: u64) -> Self {
        Self::generate_len(seed, SEQUENCE_LEN)
    }

    pub fn generate_len(seed: u64, len: usize) -> Self {
        let mut prng = Prng::new(seed);
        let mut sequences: Vec<Vec<f64>> = SOURCES
            .iter()
            .map(|d| prng.sample(d, len).expect("source parameters are valid"))
            .collect();
        for mix in MIXING {
            let row = (0..len)
                .map(|t| mix.iter().map(|&(src, c)| sequences[src][t] * c).sum())
                .collect();
            sequences.push(row);
        }
        Self { sequences }
    }

    pub fn len(&self) -> usize {
        self.sequences.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Shifts and scales every row to zero mean and unit (population)
    /// variance, returning the transform that was applied.
    pub fn standardize(&mut self) -> Standardization {
        let mut mean = Vec::with_capacity(self.sequences.len());
        let mut std = Vec::with_capacity(self.sequences.len());
        for row in &mut self.sequences {
            let n = row.len() as f64;
            let mu = row.iter().sum::<f64>() / n;
            let var = row.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
            let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
            for v in row.iter_mut() {
                *v = (*v - mu) / sd;
            }
            mean.push(mu);
            std.push(sd);
        }
        Standardization { mean, std }
    }

    /// Cuts every sequence into windows of `len` starting at `0, stride,
    /// 2·stride, …` and lays each window out as one sample.
    pub fn window(&self, len: usize, stride: usize, layout: WindowLayout) -> Result<WindowedDataset> {
        if len == 0 || stride == 0 || len > self.len() {
            return Err(Error::InvalidParameter(format!(
                "window length {len} / stride {stride} for sequences of length {}",
                self.len()
            )));
        }
        let rows = self.sequences.len();
        let count = (self.len() - len) / stride + 1;
        let samples = (0..count)
            .map(|k| {
                let start = k * stride;
                let m = match layout {
                    WindowLayout::NodesByTime => Matrix::from_fn(rows, len, |r, t| self.sequences[r][start + t]),
                    WindowLayout::TimeByNodes => Matrix::from_fn(len, rows, |t, r| self.sequences[r][start + t]),
                };
                m.map_err(|_| Error::NonFinite("sequence window"))
            })
            .collect::<Result<_>>()?;
        Ok(WindowedDataset {
            samples,
            window_len: len,
            stride,
        })
    }
}

/// How a window of all sequences becomes an `m×d` sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowLayout {
    /// One node per sequence carrying a length-`len` vector (`12×len`):
    /// scalar weights mixing whole sequences.
    NodesByTime,
    /// One column per sequence (`len×12`): a weight matrix over time shared
    /// by every sequence.
    TimeByNodes,
}

#[derive(Debug, Clone)]
pub struct WindowedDataset {
    pub samples: Vec<Matrix>,
    pub window_len: usize,
    pub stride: usize,
}
