//! Binary PGM images and plain CSV tables.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Encodes `image` (values nominally in `[0,1]`) as a binary P5 PGM with
/// maxval 255. Out-of-range values are clamped; the second element counts
/// them.
pub fn encode_pgm(image: &Matrix) -> (Vec<u8>, usize) {
    let mut clamped = 0;
    let mut out = format!("P5\n{} {}\n255\n", image.cols(), image.rows()).into_bytes();
    out.extend(image.as_slice().iter().map(|&v| {
        if !(0.0..=1.0).contains(&v) {
            clamped += 1;
        }
        (v.clamp(0.0, 1.0) * 255.0).round() as u8
    }));
    (out, clamped)
}

/// Writes `image` as a PGM file and returns the number of clamped pixels.
pub fn write_pgm(image: &Matrix, path: impl AsRef<Path>) -> Result<usize> {
    let (bytes, clamped) = encode_pgm(image);
    fs::write(path, bytes)?;
    Ok(clamped)
}

/// Reshapes a flat `len×1` column into an image of `rows×cols`.
pub fn as_image(column: &Matrix, rows: usize, cols: usize) -> Result<Matrix> {
    if column.rows() * column.cols() != rows * cols {
        return Err(Error::shape("as_image", column.shape(), (rows, cols)));
    }
    Matrix::new(rows, cols, column.as_slice().to_vec())
}

/// Shortest round-trip formatting, in exponent form outside `[1e-4, 1e15)`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Formats one CSV record with [`format_f64`].
pub fn csv_record(values: &[f64]) -> String {
    let fields: Vec<String> = values.iter().map(|&v| format_f64(v)).collect();
    fields.join(",")
}

/// Writes `,`-separated, `\n`-terminated records. The header line is
/// optional.
pub fn write_csv(path: impl AsRef<Path>, header: Option<&[&str]>, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    if let Some(h) = header {
        writeln!(w, "{}", h.join(","))?;
    }
    for row in rows {
        writeln!(w, "{}", csv_record(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses numeric CSV. A first line that does not parse as numbers is taken
/// as a header and skipped.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::format("CSV", format!("line {}: {e}", i + 1))),
        }
    }
    Ok(rows)
}
