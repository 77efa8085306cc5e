//! Binary model files.
//!
//! A layer record (`DMFD`) is, all integers little-endian:
//!
//! ```text
//! "DMFD"  version:u32  m:u32  n:u32  d:u32
//! maps:u32                       2 for an RBM (hidden, visible), 1 for a feedforward layer
//! per map: count:u32 codes:[u8; count]   count 1 means one code for every node
//! W (n×m), then the biases (RBM: B_h n×d, B_v m×d; feedforward: B n×d) as f64, row-major
//! ```
//!
//! Activation codes: identity 0, sigmoid 1, relu 2, softsign 3.
//!
//! A stack file (`DMFS`) is `"DMFS" version:u32 layers:u32` followed by one
//! RBM layer record per layer, bottom first.

use std::fs;
use std::path::Path;

use crate::activation::{ActivationKind, ActivationMap};
use crate::error::{Error, Result};
use crate::ffn::FfnLayer;
use crate::matrix::Matrix;
use crate::rbm::RbmParams;
use crate::stack::RbmStack;

pub const LAYER_MAGIC: &[u8; 4] = b"DMFD";
pub const STACK_MAGIC: &[u8; 4] = b"DMFS";
pub const VERSION: u32 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }

    fn map(&mut self, map: &ActivationMap) {
        match map {
            ActivationMap::Uniform(k) => {
                self.u32(1);
                self.0.push(k.code());
            }
            ActivationMap::PerNode(kinds) => {
                self.u32(kinds.len());
                self.0.extend(kinds.iter().map(|k| k.code()));
            }
        }
    }

    fn matrix(&mut self, m: &Matrix) {
        for v in m.as_slice() {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn header(&mut self, m: usize, n: usize, d: usize, maps: usize) {
        self.0.extend_from_slice(LAYER_MAGIC);
        for v in [VERSION as usize, m, n, d, maps] {
            self.u32(v);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::format(self.format, "unexpected end of data"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn magic(&mut self, expect: &[u8; 4]) -> Result<()> {
        if self.take(4)? != expect {
            return Err(Error::format(self.format, "bad magic"));
        }
        let version = self.u32()?;
        if version != VERSION as usize {
            return Err(Error::format(self.format, format!("unsupported version {version}")));
        }
        Ok(())
    }

    fn map(&mut self, nodes: usize) -> Result<ActivationMap> {
        let count = self.u32()?;
        let kinds = self
            .take(count)?
            .iter()
            .map(|&c| {
                ActivationKind::from_code(c)
                    .ok_or_else(|| Error::format(self.format, format!("unknown activation code {c}")))
            })
            .collect::<Result<Vec<_>>>()?;
        match count {
            1 => Ok(kinds[0].into()),
            c if c == nodes => Ok(ActivationMap::PerNode(kinds)),
            c => Err(Error::format(
                self.format,
                format!("{c} activation codes for {nodes} nodes"),
            )),
        }
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let len = rows
            .checked_mul(cols)
            .and_then(|v| v.checked_mul(8))
            .ok_or_else(|| Error::format(self.format, "dimensions overflow"))?;
        let data = self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Matrix::new(rows, cols, data).map_err(|_| Error::format(self.format, "non-finite parameter"))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(self.format, "trailing bytes"));
        }
        Ok(())
    }
}

fn encode_rbm_into(w: &mut Writer, p: &RbmParams) {
    w.header(p.visible(), p.hidden(), p.cols(), 2);
    w.map(p.act_h());
    w.map(p.act_v());
    w.matrix(p.weights());
    w.matrix(p.hidden_bias());
    w.matrix(p.visible_bias());
}

fn decode_rbm_from(r: &mut Reader) -> Result<RbmParams> {
    r.magic(LAYER_MAGIC)?;
    let (m, n, d) = (r.u32()?, r.u32()?, r.u32()?);
    if r.u32()? != 2 {
        return Err(Error::format(r.format, "not an RBM record"));
    }
    let act_h = r.map(n)?;
    let act_v = r.map(m)?;
    let w = r.matrix(n, m)?;
    let b_h = r.matrix(n, d)?;
    let b_v = r.matrix(m, d)?;
    RbmParams::from_parts(w, b_h, b_v, act_h, act_v).map_err(|e| Error::format(r.format, e.to_string()))
}

pub fn encode_rbm(params: &RbmParams) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    encode_rbm_into(&mut w, params);
    w.0
}

pub fn decode_rbm(bytes: &[u8]) -> Result<RbmParams> {
    let mut r = Reader {
        bytes,
        pos: 0,
        format: "DMFD",
    };
    let p = decode_rbm_from(&mut r)?;
    r.finish()?;
    Ok(p)
}

pub fn encode_ffn(layer: &FfnLayer) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.header(layer.inputs(), layer.outputs(), layer.cols(), 1);
    w.map(layer.act());
    w.matrix(layer.weights());
    w.matrix(layer.bias());
    w.0
}

pub fn decode_ffn(bytes: &[u8]) -> Result<FfnLayer> {
    let mut r = Reader {
        bytes,
        pos: 0,
        format: "DMFD",
    };
    r.magic(LAYER_MAGIC)?;
    let (m, n, d) = (r.u32()?, r.u32()?, r.u32()?);
    if r.u32()? != 1 {
        return Err(Error::format(r.format, "not a feedforward record"));
    }
    let act = r.map(n)?;
    let w = r.matrix(n, m)?;
    let b = r.matrix(n, d)?;
    r.finish()?;
    FfnLayer::from_parts(w, b, act).map_err(|e| Error::format(r.format, e.to_string()))
}

pub fn encode_stack(stack: &RbmStack) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(STACK_MAGIC);
    w.u32(VERSION as usize);
    w.u32(stack.layers().len());
    for layer in stack.layers() {
        encode_rbm_into(&mut w, layer);
    }
    w.0
}

pub fn decode_stack(bytes: &[u8]) -> Result<RbmStack> {
    let mut r = Reader {
        bytes,
        pos: 0,
        format: "DMFS",
    };
    r.magic(STACK_MAGIC)?;
    let count = r.u32()?;
    let layers = (0..count)
        .map(|_| decode_rbm_from(&mut r))
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    RbmStack::new(layers).map_err(|e| Error::format("DMFS", e.to_string()))
}

pub fn save_rbm(params: &RbmParams, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_rbm(params))?)
}

pub fn load_rbm(path: impl AsRef<Path>) -> Result<RbmParams> {
    decode_rbm(&fs::read(path)?)
}

pub fn save_ffn(layer: &FfnLayer, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_ffn(layer))?)
}

pub fn load_ffn(path: impl AsRef<Path>) -> Result<FfnLayer> {
    decode_ffn(&fs::read(path)?)
}

pub fn save_stack(stack: &RbmStack, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, encode_stack(stack))?)
}

pub fn load_stack(path: impl AsRef<Path>) -> Result<RbmStack> {
    decode_stack(&fs::read(path)?)
}
