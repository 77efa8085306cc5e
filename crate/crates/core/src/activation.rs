//! Elementwise activations, assignable per node (per matrix row).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Identity,
    Sigmoid,
    Relu,
    /// `x / (1 + |x|)`
    Softsign,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 4] = [
        ActivationKind::Identity,
        ActivationKind::Sigmoid,
        ActivationKind::Relu,
        ActivationKind::Softsign,
    ];

    #[inline]
    pub fn forward(self, x: f64) -> f64 {
        match self {
            ActivationKind::Identity => x,
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Softsign => x / (1.0 + x.abs()),
        }
    }

    /// Derivative expressed through the activation's output `y = forward(x)`.
    /// Relu at exactly zero output gets derivative 0.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            ActivationKind::Identity => 1.0,
            ActivationKind::Sigmoid => y * (1.0 - y),
            ActivationKind::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Softsign => {
                let t = 1.0 - y.abs();
                t * t
            }
        }
    }

    /// Stable one-byte code used by the model file format.
    pub fn code(self) -> u8 {
        match self {
            ActivationKind::Identity => 0,
            ActivationKind::Sigmoid => 1,
            ActivationKind::Relu => 2,
            ActivationKind::Softsign => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Identity => "identity",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Relu => "relu",
            ActivationKind::Softsign => "softsign",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown activation `{s}`")))
    }
}

/// Activation assignment for one layer: a single kind for every node, or one
/// kind per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActivationMap {
    Uniform(ActivationKind),
    PerNode(Vec<ActivationKind>),
}

impl From<ActivationKind> for ActivationMap {
    fn from(kind: ActivationKind) -> Self {
        ActivationMap::Uniform(kind)
    }
}

impl ActivationMap {
    /// Whether the map can be attached to a layer with `nodes` rows.
    pub fn fits(&self, nodes: usize) -> bool {
        match self {
            ActivationMap::Uniform(_) => true,
            ActivationMap::PerNode(kinds) => kinds.len() == nodes,
        }
    }

    #[inline]
    pub fn kind(&self, node: usize) -> ActivationKind {
        match self {
            ActivationMap::Uniform(k) => *k,
            ActivationMap::PerNode(kinds) => kinds[node],
        }
    }

    /// True if every node uses `kind`.
    pub fn is_all(&self, kind: ActivationKind) -> bool {
        match self {
            ActivationMap::Uniform(k) => *k == kind,
            ActivationMap::PerNode(kinds) => kinds.iter().all(|k| *k == kind),
        }
    }

    fn check(&self, m: &Matrix, op: &'static str) -> Result<()> {
        if self.fits(m.rows()) {
            Ok(())
        } else {
            let len = match self {
                ActivationMap::PerNode(k) => k.len(),
                ActivationMap::Uniform(_) => unreachable!(),
            };
            Err(Error::shape(op, (len, 1), m.shape()))
        }
    }

    fn rowwise(&self, m: &Matrix, op: &'static str, f: impl Fn(ActivationKind, f64) -> f64) -> Result<Matrix> {
        self.check(m, op)?;
        let cols = m.cols();
        Matrix::from_fn(m.rows(), cols, |r, c| f(self.kind(r), m.get(r, c))).map_err(|_| Error::NonFinite(op))
    }

    /// Applies node `i`'s activation to every entry of row `i`.
    pub fn apply(&self, pre: &Matrix) -> Result<Matrix> {
        if self.is_all(ActivationKind::Identity) {
            self.check(pre, "activation apply")?;
            return Ok(pre.clone());
        }
        self.rowwise(pre, "activation apply", ActivationKind::forward)
    }

    /// `A′` evaluated from the activation output.
    pub fn derivative_from_output(&self, out: &Matrix) -> Result<Matrix> {
        if self.is_all(ActivationKind::Identity) {
            self.check(out, "activation derivative")?;
            return Ok(Matrix::ones(out.rows(), out.cols()));
        }
        self.rowwise(out, "activation derivative", ActivationKind::derivative_from_output)
    }
}
