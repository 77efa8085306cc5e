//! Reconstruction error metrics.

use crate::data::format_f64;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Mean of squared entrywise differences.
pub fn mse(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::shape("mse", a.shape(), b.shape()));
    }
    let n = a.as_slice().len();
    if n == 0 {
        return Ok(0.0);
    }
    let s: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(s / n as f64)
}

/// Pooled mse over paired samples of equal size.
pub fn mean_mse(a: &[Matrix], b: &[Matrix]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidParameter(
            "mean_mse needs equal, non-empty sample lists".into(),
        ));
    }
    let mut total = 0.0;
    for (x, y) in a.iter().zip(b) {
        total += mse(x, y)?;
    }
    Ok(total / a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAdjusted {
    pub value: f64,
    /// False when `mse ≥ 1`, where the transform is not meaningful
    /// (negative, or infinite at exactly 1).
    pub in_range: bool,
}

/// `−1/ln(mse)`: maps `(0, 1)` monotonically onto `(0, ∞)`. Zero maps to
/// zero by continuity.
pub fn log_adjusted(mse: f64) -> Result<LogAdjusted> {
    if mse.is_nan() || mse < 0.0 {
        return Err(Error::InvalidParameter(format!("mse {mse}")));
    }
    if mse == 0.0 {
        return Ok(LogAdjusted {
            value: 0.0,
            in_range: true,
        });
    }
    Ok(LogAdjusted {
        value: -1.0 / mse.ln(),
        in_range: mse < 1.0,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    /// The swept quantity (hidden nodes, feature dimension, …).
    pub param: usize,
    /// `None` when training for this point diverged.
    pub mse: Option<f64>,
    pub log_adjusted: Option<LogAdjusted>,
}

impl CurvePoint {
    pub fn new(param: usize, mse: f64) -> Self {
        Self {
            param,
            mse: Some(mse),
            log_adjusted: log_adjusted(mse).ok(),
        }
    }

    pub fn diverged(param: usize) -> Self {
        Self {
            param,
            mse: None,
            log_adjusted: None,
        }
    }
}

/// Error versus a swept parameter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
}

impl ErrorCurve {
    pub fn mse_at(&self, param: usize) -> Option<f64> {
        self.points.iter().find(|p| p.param == param).and_then(|p| p.mse)
    }

    /// CSV rows `param,mse,log_adjusted,status`; diverged points carry NaN.
    pub fn to_csv(&self, param_name: &str) -> String {
        let mut out = format!("{param_name},mse,log_adjusted,status\n");
        for p in &self.points {
            let (mse, la, status) = match (p.mse, p.log_adjusted) {
                (Some(m), Some(l)) => (m, l.value, if l.in_range { "ok" } else { "mse_ge_1" }),
                _ => (f64::NAN, f64::NAN, "diverged"),
            };
            out.push_str(&format!(
                "{},{},{},{status}\n",
                p.param,
                format_f64(mse),
                format_f64(la)
            ));
        }
        out
    }
}
