//! The data mapping between a visible layer and a hidden layer.
//!
//! Projection `Ỹ = A_h(W·X + B_h)` and reconstruction `X̃ = A_v(Wᵀ·Ỹ + B_v)`
//! share one weight matrix. Node data may be matrix valued: a sample is
//! `m×d`, with `d = 1` for plain vectors and `d > 1` when every node carries a
//! length-`d` vector. All products then sum over the `d` columns.

mod train;

pub use train::{fd_step, gd_step, train, LearningRate, Scheme, TrainConfig, TrainOutcome};

use crate::activation::ActivationMap;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::prng::Prng;

/// Which squared error is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyVariant {
    /// `½‖X̃ − X₀‖²`
    #[default]
    Raw,
    /// `½‖X̃ − A_v(X₀)‖²`, comparing in the range of the visible activation.
    Recirculation,
}

impl std::str::FromStr for EnergyVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(EnergyVariant::Raw),
            "recirculation" => Ok(EnergyVariant::Recirculation),
            _ => Err(Error::InvalidParameter(format!(
                "unknown energy {s:?} (raw, recirculation)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbmParams {
    w: Matrix,
    b_h: Matrix,
    b_v: Matrix,
    act_h: ActivationMap,
    act_v: ActivationMap,
}

impl RbmParams {
    /// Assembles parameters, checking `W: n×m`, `B_h: n×d`, `B_v: m×d`.
    pub fn from_parts(w: Matrix, b_h: Matrix, b_v: Matrix, act_h: ActivationMap, act_v: ActivationMap) -> Result<Self> {
        let (n, m) = w.shape();
        if b_h.rows() != n {
            return Err(Error::shape("hidden bias", w.shape(), b_h.shape()));
        }
        if b_v.rows() != m || b_v.cols() != b_h.cols() || b_h.cols() == 0 {
            return Err(Error::shape("visible bias", b_h.shape(), b_v.shape()));
        }
        if !act_h.fits(n) || !act_v.fits(m) {
            return Err(Error::InvalidParameter(format!(
                "activation maps do not fit {n} hidden / {m} visible nodes"
            )));
        }
        Ok(Self {
            w,
            b_h,
            b_v,
            act_h,
            act_v,
        })
    }

    /// Weights uniform in `(−1/√m, 1/√m)`, zero biases.
    pub fn init(
        visible: usize,
        hidden: usize,
        cols: usize,
        act_h: ActivationMap,
        act_v: ActivationMap,
        prng: &mut Prng,
    ) -> Result<Self> {
        if visible == 0 || hidden == 0 || cols == 0 {
            return Err(Error::InvalidParameter("layer sizes must be positive".into()));
        }
        let bound = 1.0 / (visible as f64).sqrt();
        let w = Matrix::from_fn(hidden, visible, |_, _| prng.uniform(-bound, bound))?;
        Self::from_parts(
            w,
            Matrix::zeros(hidden, cols),
            Matrix::zeros(visible, cols),
            act_h,
            act_v,
        )
    }

    pub fn visible(&self) -> usize {
        self.w.cols()
    }

    pub fn hidden(&self) -> usize {
        self.w.rows()
    }

    /// Column count `d` of node data.
    pub fn cols(&self) -> usize {
        self.b_h.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.w
    }

    pub fn hidden_bias(&self) -> &Matrix {
        &self.b_h
    }

    pub fn visible_bias(&self) -> &Matrix {
        &self.b_v
    }

    pub fn act_h(&self) -> &ActivationMap {
        &self.act_h
    }

    pub fn act_v(&self) -> &ActivationMap {
        &self.act_v
    }

    pub(crate) fn replace(&self, w: Matrix, b_h: Matrix, b_v: Matrix) -> Self {
        debug_assert_eq!(w.shape(), self.w.shape());
        Self {
            w,
            b_h,
            b_v,
            act_h: self.act_h.clone(),
            act_v: self.act_v.clone(),
        }
    }

    pub fn with_weights(&self, w: Matrix) -> Result<Self> {
        Self::from_parts(
            w,
            self.b_h.clone(),
            self.b_v.clone(),
            self.act_h.clone(),
            self.act_v.clone(),
        )
    }

    pub fn with_biases(&self, b_h: Matrix, b_v: Matrix) -> Result<Self> {
        Self::from_parts(self.w.clone(), b_h, b_v, self.act_h.clone(), self.act_v.clone())
    }

    fn check_visible(&self, x: &Matrix, op: &'static str) -> Result<()> {
        if x.shape() != self.b_v.shape() {
            return Err(Error::shape(op, self.b_v.shape(), x.shape()));
        }
        Ok(())
    }

    /// `(W·x + B_h, A_h(W·x + B_h))`
    pub fn project(&self, x: &Matrix) -> Result<(Matrix, Matrix)> {
        self.check_visible(x, "project")?;
        let pre = self.w.matmul(x)?.add(&self.b_h)?;
        let post = self.act_h.apply(&pre)?;
        Ok((pre, post))
    }

    /// `(Wᵀ·y + B_v, A_v(Wᵀ·y + B_v))`
    pub fn reconstruct(&self, y: &Matrix) -> Result<(Matrix, Matrix)> {
        if y.shape() != self.b_h.shape() {
            return Err(Error::shape("reconstruct", self.b_h.shape(), y.shape()));
        }
        let pre = self.w.matmul_at_b(y)?.add(&self.b_v)?;
        let post = self.act_v.apply(&pre)?;
        Ok((pre, post))
    }

    /// One projection/reconstruction round trip from `x0`.
    pub fn round_trip(&self, x0: &Matrix) -> Result<RbmState> {
        let (y_pre, y_post) = self.project(x0)?;
        let (x_pre, x_post) = self.reconstruct(&y_post)?;
        let delta_x = x_post.sub(x0)?;
        Ok(RbmState {
            y_pre,
            y_post,
            x_pre,
            x_post,
            delta_x,
        })
    }

    /// The reconstruction target for `variant`.
    pub fn target(&self, x0: &Matrix, variant: EnergyVariant) -> Result<Matrix> {
        match variant {
            EnergyVariant::Raw => Ok(x0.clone()),
            EnergyVariant::Recirculation => self.act_v.apply(x0),
        }
    }

    pub fn energy(&self, x0: &Matrix, variant: EnergyVariant) -> Result<f64> {
        let state = self.round_trip(x0)?;
        let residual = state.residual(self, x0, variant)?;
        Ok(0.5 * residual.frob_sq())
    }

    /// Analytic gradients of the energy with respect to `W`, `B_h` and `B_v`.
    pub fn gradients(&self, x0: &Matrix, variant: EnergyVariant) -> Result<Gradients> {
        let state = self.round_trip(x0)?;
        self.gradients_at(&state, x0, variant)
    }

    pub(crate) fn gradients_at(&self, state: &RbmState, x0: &Matrix, variant: EnergyVariant) -> Result<Gradients> {
        // δX = A′_v(X̃) ⊙ residual
        let residual = state.residual(self, x0, variant)?;
        let delta = self.act_v.derivative_from_output(&state.x_post)?.hadamard(&residual)?;
        // A′_h(Ỹ) ⊙ (W·δX)
        let back = self
            .act_h
            .derivative_from_output(&state.y_post)?
            .hadamard(&self.w.matmul(&delta)?)?;
        let w = state.y_post.matmul_a_bt(&delta)?.add(&back.matmul_a_bt(x0)?)?;
        Ok(Gradients {
            w,
            b_h: back,
            b_v: delta,
        })
    }
}

/// Intermediate values of one round trip. `_pre` fields are before the
/// activation, `_post` after.
#[derive(Debug, Clone)]
pub struct RbmState {
    pub y_pre: Matrix,
    pub y_post: Matrix,
    pub x_pre: Matrix,
    pub x_post: Matrix,
    /// `X̃ − X₀`
    pub delta_x: Matrix,
}

impl RbmState {
    fn residual(&self, params: &RbmParams, x0: &Matrix, variant: EnergyVariant) -> Result<Matrix> {
        match variant {
            EnergyVariant::Raw => Ok(self.delta_x.clone()),
            EnergyVariant::Recirculation => self.x_post.sub(&params.target(x0, variant)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Matrix,
    pub b_h: Matrix,
    pub b_v: Matrix,
}
