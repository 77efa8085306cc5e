//! MNIST-style IDX image files (magic `0x00000803`, big-endian header).
//! Gzip-compressed files are detected by their magic bytes and inflated.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;

#[derive(Debug, Clone)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// One `rows·cols × 1` column per image, pixels scaled by `1/255`.
    pub images: Vec<Matrix>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        self.images.len()
    }

    pub fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    /// Keeps the first `n` images.
    pub fn truncate(&mut self, n: usize) {
        self.images.truncate(n);
    }

    /// Averages non-overlapping `factor×factor` blocks.
    pub fn downsample(&self, factor: usize) -> Result<IdxImages> {
        if factor == 0 || !self.rows.is_multiple_of(factor) || !self.cols.is_multiple_of(factor) {
            return Err(Error::InvalidParameter(format!(
                "cannot downsample {}x{} by {factor}",
                self.rows, self.cols
            )));
        }
        let (rows, cols) = (self.rows / factor, self.cols / factor);
        let norm = 1.0 / (factor * factor) as f64;
        let images = self
            .images
            .iter()
            .map(|img| {
                Matrix::from_fn(rows * cols, 1, |k, _| {
                    let (r, c) = (k / cols, k % cols);
                    let mut s = 0.0;
                    for dr in 0..factor {
                        for dc in 0..factor {
                            s += img.get((r * factor + dr) * self.cols + c * factor + dc, 0);
                        }
                    }
                    s * norm
                })
            })
            .collect::<Result<_>>()?;
        Ok(IdxImages { rows, cols, images })
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn parse_idx(bytes: &[u8]) -> Result<IdxImages> {
    if bytes.len() < 16 {
        return Err(Error::format("IDX", "truncated header"));
    }
    let magic = be_u32(bytes, 0);
    if magic != IMAGE_MAGIC {
        return Err(Error::format("IDX", format!("bad magic number {magic:#010x}")));
    }
    let count = be_u32(bytes, 4) as usize;
    let rows = be_u32(bytes, 8) as usize;
    let cols = be_u32(bytes, 12) as usize;
    let expected = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::format("IDX", "header dimensions overflow"))?;
    let payload = &bytes[16..];
    if payload.len() < expected {
        return Err(Error::format(
            "IDX",
            format!("truncated payload: {} of {expected} bytes", payload.len()),
        ));
    }
    if payload.len() > expected {
        return Err(Error::format(
            "IDX",
            format!(
                "dimension mismatch: {} payload bytes for {count}x{rows}x{cols}",
                payload.len()
            ),
        ));
    }
    let px = rows * cols;
    let images = if px == 0 {
        vec![Matrix::zeros(0, 1); count]
    } else {
        payload
            .chunks_exact(px)
            .map(|chunk| Matrix::new(px, 1, chunk.iter().map(|&b| b as f64 / 255.0).collect()))
            .collect::<Result<_>>()?
    };
    Ok(IdxImages { rows, cols, images })
}

pub fn read_idx(path: impl AsRef<Path>) -> Result<IdxImages> {
    let raw = fs::read(path)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut bytes = Vec::new();
        GzDecoder::new(raw.as_slice())
            .read_to_end(&mut bytes)
            .map_err(|e| Error::format("IDX", format!("gzip: {e}")))?;
        parse_idx(&bytes)
    } else {
        parse_idx(&raw)
    }
}

/// Writes raw byte images as an uncompressed IDX file.
pub fn write_idx(path: impl AsRef<Path>, rows: usize, cols: usize, images: &[Vec<u8>]) -> Result<()> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [IMAGE_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        if img.len() != rows * cols {
            return Err(Error::InvalidParameter("image size does not match header".into()));
        }
        out.extend_from_slice(img);
    }
    fs::File::create(path)?.write_all(&out)?;
    Ok(())
}
