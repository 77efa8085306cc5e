use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::prng::Prng;

use super::{EnergyVariant, RbmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Exact gradient descent on the energy.
    #[default]
    Gd,
    /// Finite-difference learning from two rounds of data mapping (CD1).
    Fd,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Scheme::Gd),
            "fd" => Ok(Scheme::Fd),
            _ => Err(Error::InvalidParameter(format!("unknown scheme {s:?} (gd, fd)"))),
        }
    }
}

/// Step size: one scalar, or per-element rates for each parameter block.
#[derive(Debug, Clone, PartialEq)]
pub enum LearningRate {
    Scalar(f64),
    PerElement {
        /// `m×d`, applied to the visible bias
        visible: Matrix,
        /// `n×d`, applied to the hidden bias
        hidden: Matrix,
        /// `n×m`, applied to the weights
        weights: Matrix,
    },
}

impl LearningRate {
    fn validate(&self, params: &RbmParams) -> Result<()> {
        match self {
            LearningRate::Scalar(g) if *g > 0.0 && g.is_finite() => Ok(()),
            LearningRate::Scalar(g) => Err(Error::InvalidParameter(format!("learning rate {g}"))),
            LearningRate::PerElement {
                visible,
                hidden,
                weights,
            } => {
                let shapes_ok = visible.shape() == params.visible_bias().shape()
                    && hidden.shape() == params.hidden_bias().shape()
                    && weights.shape() == params.weights().shape();
                if !shapes_ok {
                    return Err(Error::InvalidParameter(
                        "learning rate shapes do not match parameters".into(),
                    ));
                }
                let positive = [visible, hidden, weights]
                    .iter()
                    .all(|m| m.as_slice().iter().all(|&g| g > 0.0));
                if !positive {
                    return Err(Error::InvalidParameter("learning rates must be positive".into()));
                }
                Ok(())
            }
        }
    }

    /// `param − rate ⊙ update` for the block `which`.
    fn descend(&self, which: Block, param: &Matrix, update: &Matrix) -> Result<Matrix> {
        let out = match self {
            LearningRate::Scalar(g) => param.sub_scaled(*g, update),
            LearningRate::PerElement {
                visible,
                hidden,
                weights,
            } => {
                let rate = match which {
                    Block::Visible => visible,
                    Block::Hidden => hidden,
                    Block::Weights => weights,
                };
                rate.hadamard(update).and_then(|step| param.sub(&step))
            }
        };
        out.map_err(|e| match e {
            Error::NonFinite(_) => Error::NonFinite(which.name()),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Block {
    Visible,
    Hidden,
    Weights,
}

impl Block {
    fn name(self) -> &'static str {
        match self {
            Block::Visible => "visible bias",
            Block::Hidden => "hidden bias",
            Block::Weights => "weights",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub scheme: Scheme,
    pub rate: LearningRate,
    pub energy: EnergyVariant,
    pub epochs: usize,
    pub seed: u64,
    /// Reshuffle the sample order every epoch.
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Gd,
            rate: LearningRate::Scalar(0.01),
            energy: EnergyVariant::Raw,
            epochs: 100,
            seed: 42,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn gd(rate: f64) -> Self {
        Self {
            rate: LearningRate::Scalar(rate),
            ..Self::default()
        }
    }

    pub fn fd(rate: f64) -> Self {
        Self {
            scheme: Scheme::Fd,
            rate: LearningRate::Scalar(rate),
            ..Self::default()
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_energy(mut self, energy: EnergyVariant) -> Self {
        self.energy = energy;
        self
    }

    pub fn with_shuffle(mut self, shuffle: bool) -> Self {
        self.shuffle = shuffle;
        self
    }
}

/// One gradient-descent update. Returns the new parameters and the energy
/// of `params` on `x0` before the update.
///
/// ```text
/// δX  = A′_v(X̃₁) ⊙ (X̃₁ − X₀)
/// B_v ← B_v − γ·δX
/// B_h ← B_h − γ·A′_h(Ỹ₀) ⊙ (W·δX)
/// W   ← W − γ·(Ỹ₀·δXᵀ + (A′_h(Ỹ₀) ⊙ (W·δX))·X₀ᵀ)
/// ```
pub fn gd_step(params: &RbmParams, x0: &Matrix, config: &TrainConfig) -> Result<(RbmParams, f64)> {
    if config.scheme != Scheme::Gd {
        return Err(Error::InvalidParameter("gd_step needs the GD scheme".into()));
    }
    config.rate.validate(params)?;
    let state = params.round_trip(x0)?;
    let energy = match config.energy {
        EnergyVariant::Raw => 0.5 * state.delta_x.frob_sq(),
        v => 0.5 * state.residual(params, x0, v)?.frob_sq(),
    };
    let g = params.gradients_at(&state, x0, config.energy)?;
    let rate = &config.rate;
    let b_v = rate.descend(Block::Visible, params.visible_bias(), &g.b_v)?;
    let b_h = rate.descend(Block::Hidden, params.hidden_bias(), &g.b_h)?;
    let w = rate.descend(Block::Weights, params.weights(), &g.w)?;
    Ok((params.replace(w, b_h, b_v), energy))
}

/// One finite-difference update from two rounds of data mapping.
///
/// ```text
/// (X̃₁, Ỹ₀) from the first round trip, Ỹ₁ = A_h(W·X̃₁ + B_h)
/// B_v ← B_v − γ_v ⊙ (X̃₁ − X₀)
/// B_h ← B_h − γ_h ⊙ (Ỹ₁ − Ỹ₀)
/// W   ← W − γ_W ⊙ (Ỹ₁·X̃₁ᵀ − Ỹ₀·X₀ᵀ)
/// ```
///
/// No derivative is evaluated, so non-smooth activations are fine. The
/// returned energy follows `config.energy`; the update itself always
/// compares against `X₀`.
pub fn fd_step(params: &RbmParams, x0: &Matrix, config: &TrainConfig) -> Result<(RbmParams, f64)> {
    if config.scheme != Scheme::Fd {
        return Err(Error::InvalidParameter("fd_step needs the FD scheme".into()));
    }
    config.rate.validate(params)?;
    let first = params.round_trip(x0)?;
    let energy = match config.energy {
        EnergyVariant::Raw => 0.5 * first.delta_x.frob_sq(),
        v => 0.5 * first.residual(params, x0, v)?.frob_sq(),
    };
    let (_, y1) = params.project(&first.x_post)?;
    let y0 = &first.y_post;
    let x1 = &first.x_post;

    let dw = y1.matmul_a_bt(x1)?.sub(&y0.matmul_a_bt(x0)?)?;
    let dh = y1.sub(y0)?;
    let rate = &config.rate;
    let b_v = rate.descend(Block::Visible, params.visible_bias(), &first.delta_x)?;
    let b_h = rate.descend(Block::Hidden, params.hidden_bias(), &dh)?;
    let w = rate.descend(Block::Weights, params.weights(), &dw)?;
    Ok((params.replace(w, b_h, b_v), energy))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: RbmParams,
    /// Mean pre-update energy of every epoch.
    pub energies: Vec<f64>,
}

/// Online training: `config.epochs` passes over `data`, one update per
/// sample. `on_epoch(epoch, mean_energy)` runs after every epoch (1-based).
///
/// A non-finite parameter aborts with [`Error::Diverged`] naming the epoch
/// and sample.
pub fn train(
    params: RbmParams,
    data: &[Matrix],
    config: &TrainConfig,
    on_epoch: &mut dyn FnMut(usize, f64),
) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let shape = params.visible_bias().shape();
    if let Some(bad) = data.iter().find(|x| x.shape() != shape) {
        return Err(Error::shape("training sample", shape, bad.shape()));
    }
    config.rate.validate(&params)?;

    let step = match config.scheme {
        Scheme::Gd => gd_step,
        Scheme::Fd => fd_step,
    };
    let mut prng = Prng::new(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut params = params;
    let mut energies = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        if config.shuffle {
            order.sort_unstable();
            prng.shuffle(&mut order);
        }
        let mut total = 0.0;
        for &i in &order {
            let (next, e) = step(&params, &data[i], config).map_err(|err| match err {
                Error::NonFinite(block) => Error::Diverged {
                    epoch,
                    sample: i,
                    block,
                },
                other => other,
            })?;
            params = next;
            total += e;
        }
        let mean = total / data.len() as f64;
        on_epoch(epoch, mean);
        energies.push(mean);
    }
    Ok(TrainOutcome { params, energies })
}
