//! Image triplets (original, reconstruction, feature map) and summary files.

use std::fs;
use std::path::Path;

use datamap::data::{as_image, write_csv, write_pgm};
use datamap::Matrix;

use crate::CliError;

/// Square `s×s` when the code length is a perfect square, otherwise a
/// one-row strip.
pub fn feature_shape(len: usize) -> (usize, usize) {
    let s = (len as f64).sqrt().round() as usize;
    if s * s == len {
        (s, s)
    } else {
        (1, len)
    }
}

/// Affine rescale to `[0,1]`; a constant code maps to all zeros.
pub fn rescale(code: &Matrix) -> (Matrix, f64, f64) {
    let v = code.as_slice();
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let scaled = code.map(|x| if span > 0.0 { (x - lo) / span } else { 0.0 });
    (scaled.expect("rescaled values are finite"), lo, hi)
}

pub struct Triplet<'a> {
    pub original: &'a Matrix,
    pub reconstruction: &'a Matrix,
    pub code: &'a Matrix,
}

/// Writes `images/NN-original.pgm`, `NN-reconstruction.pgm`,
/// `NN-features.pgm` and `feature-bounds.csv`. Returns the clamped pixel
/// count.
pub fn write_triplets(dir: &Path, rows: usize, cols: usize, triplets: &[Triplet]) -> Result<usize, CliError> {
    let images = dir.join("images");
    fs::create_dir_all(&images).map_err(|e| CliError::Io(format!("{}: {e}", images.display())))?;
    let mut clamped = 0;
    let mut bounds = Vec::with_capacity(triplets.len());
    for (i, t) in triplets.iter().enumerate() {
        let (fr, fc) = feature_shape(t.code.rows() * t.code.cols());
        let (scaled, lo, hi) = rescale(t.code);
        bounds.push(vec![i as f64, lo, hi]);
        for (name, image) in [
            ("original", as_image(t.original, rows, cols)?),
            ("reconstruction", as_image(t.reconstruction, rows, cols)?),
            ("features", as_image(&scaled, fr, fc)?),
        ] {
            clamped += write_pgm(&image, images.join(format!("{i:02}-{name}.pgm")))?;
        }
    }
    write_csv(dir.join("feature-bounds.csv"), Some(&["image", "min", "max"]), &bounds)?;
    Ok(clamped)
}

pub fn write_energy(path: &Path, energies: &[f64]) -> Result<(), CliError> {
    let rows: Vec<Vec<f64>> = energies
        .iter()
        .enumerate()
        .map(|(i, &e)| vec![(i + 1) as f64, e])
        .collect();
    write_csv(path, Some(&["epoch", "energy"]), &rows)?;
    Ok(())
}

pub fn write_summary(path: &Path, train_mse: f64, test_mse: f64) -> Result<(), CliError> {
    write_csv(path, Some(&["train_mse", "test_mse"]), &[vec![train_mse, test_mse]])?;
    Ok(())
}
