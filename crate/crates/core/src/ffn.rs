//! A single directed (feedforward) layer `Ỹ = A(W·X + B)` fitted to a target
//! `Y₀` under `½‖A(W·X + B) − Y₀‖²`, by gradient descent or by finite
//! differences.
//!
//! With `update_input` set, the input is also moved downhill, which is what
//! a layer in the middle of a stack (or a reconstruction-from-projections
//! solver) needs. Stacking layers is left to the caller.

use crate::activation::ActivationMap;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::prng::Prng;

#[derive(Debug, Clone, PartialEq)]
pub struct FfnLayer {
    w: Matrix,
    b: Matrix,
    act: ActivationMap,
}

/// Step size for a layer update: scalar or element-dependent.
#[derive(Debug, Clone, PartialEq)]
pub enum Rate {
    Scalar(f64),
    PerElement(Matrix),
}

impl Rate {
    fn apply(&self, update: &Matrix) -> Result<Matrix> {
        match self {
            Rate::Scalar(g) => update.scale(*g),
            Rate::PerElement(g) => g.hadamard(update),
        }
    }
}

impl From<f64> for Rate {
    fn from(g: f64) -> Self {
        Rate::Scalar(g)
    }
}

/// Finite-difference rates: `output` (`n×d`) scales the bias and weight
/// steps, `input` (`m×d`) the input step.
#[derive(Debug, Clone, PartialEq)]
pub struct FdRates {
    pub output: Rate,
    pub input: Rate,
}

impl FdRates {
    pub fn scalar(g: f64) -> Self {
        Self {
            output: Rate::Scalar(g),
            input: Rate::Scalar(g),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfnUpdate {
    pub layer: FfnLayer,
    /// The moved input, when requested.
    pub input: Option<Matrix>,
    /// Energy before the update.
    pub energy: f64,
}

impl FfnLayer {
    pub fn from_parts(w: Matrix, b: Matrix, act: ActivationMap) -> Result<Self> {
        if b.rows() != w.rows() || b.cols() == 0 {
            return Err(Error::shape("ffn bias", w.shape(), b.shape()));
        }
        if !act.fits(w.rows()) {
            return Err(Error::InvalidParameter("activation map does not fit layer".into()));
        }
        Ok(Self { w, b, act })
    }

    pub fn init(inputs: usize, outputs: usize, cols: usize, act: ActivationMap, prng: &mut Prng) -> Result<Self> {
        let bound = 1.0 / (inputs as f64).sqrt();
        let w = Matrix::from_fn(outputs, inputs, |_, _| prng.uniform(-bound, bound))?;
        Self::from_parts(w, Matrix::zeros(outputs, cols), act)
    }

    pub fn weights(&self) -> &Matrix {
        &self.w
    }

    pub fn bias(&self) -> &Matrix {
        &self.b
    }

    pub fn act(&self) -> &ActivationMap {
        &self.act
    }

    pub fn inputs(&self) -> usize {
        self.w.cols()
    }

    pub fn outputs(&self) -> usize {
        self.w.rows()
    }

    pub fn cols(&self) -> usize {
        self.b.cols()
    }

    pub fn forward(&self, x: &Matrix) -> Result<Matrix> {
        if x.rows() != self.w.cols() || x.cols() != self.b.cols() {
            return Err(Error::shape("ffn forward", (self.w.cols(), self.b.cols()), x.shape()));
        }
        self.act.apply(&self.w.matmul(x)?.add(&self.b)?)
    }

    pub fn energy(&self, x: &Matrix, target: &Matrix) -> Result<f64> {
        Ok(0.5 * self.forward(x)?.sub(target)?.frob_sq())
    }

    /// Gradient descent on the fitting error:
    ///
    /// ```text
    /// e  = A′(Ỹ₁) ⊙ (Ỹ₁ − Y₀)
    /// X₁ = X₀ − γ·Wᵀ·e
    /// B₁ = B₀ − γ·e
    /// W₁ = W₀ − γ·e·X₀ᵀ
    /// ```
    pub fn gd_update(&self, x0: &Matrix, target: &Matrix, rate: f64, update_input: bool) -> Result<FfnUpdate> {
        let y1 = self.forward(x0)?;
        let diff = y1.sub(target)?;
        let e = self.act.derivative_from_output(&y1)?.hadamard(&diff)?;
        let input = if update_input {
            Some(
                x0.sub_scaled(rate, &self.w.matmul_at_b(&e)?)
                    .map_err(|_| Error::NonFinite("ffn input"))?,
            )
        } else {
            None
        };
        let b = self.b.sub_scaled(rate, &e).map_err(|_| Error::NonFinite("ffn bias"))?;
        let w = self
            .w
            .sub_scaled(rate, &e.matmul_a_bt(x0)?)
            .map_err(|_| Error::NonFinite("ffn weights"))?;
        Ok(FfnUpdate {
            layer: Self {
                w,
                b,
                act: self.act.clone(),
            },
            input,
            energy: 0.5 * diff.frob_sq(),
        })
    }

    /// The derivative-free counterpart of [`gd_update`](Self::gd_update):
    ///
    /// ```text
    /// X₁ = X₀ − γ_in ⊙ (Wᵀ·(Ỹ₁ − Y₀))
    /// B₁ = B₀ − γ_out ⊙ (Ỹ₁ − Y₀)
    /// W₁ = W₀ − (γ_out ⊙ (Ỹ₁ − Y₀))·X₀ᵀ
    /// ```
    ///
    /// Identical to gradient descent for the identity activation, and
    /// well defined for relu at its kink.
    pub fn fd_update(&self, x0: &Matrix, target: &Matrix, rates: &FdRates, update_input: bool) -> Result<FfnUpdate> {
        let y1 = self.forward(x0)?;
        let diff = y1.sub(target)?;
        let input = if update_input {
            let step = rates.input.apply(&self.w.matmul_at_b(&diff)?)?;
            Some(x0.sub(&step).map_err(|_| Error::NonFinite("ffn input"))?)
        } else {
            None
        };
        let scaled = rates.output.apply(&diff)?;
        let b = self.b.sub(&scaled).map_err(|_| Error::NonFinite("ffn bias"))?;
        let w = self
            .w
            .sub(&scaled.matmul_a_bt(x0)?)
            .map_err(|_| Error::NonFinite("ffn weights"))?;
        Ok(FfnUpdate {
            layer: Self {
                w,
                b,
                act: self.act.clone(),
            },
            input,
            energy: 0.5 * diff.frob_sq(),
        })
    }
}
