//! Deterministic data mappings between a visible and a hidden layer,
//! `Ỹ = A_h(W·X + B_h)` and `X̃ = A_v(Wᵀ·Ỹ + B_v)`, trained on squared
//! reconstruction error by gradient descent or by finite differences.
//!
//! Layer states are matrices: a sample is `m×d`, so each node may carry a
//! length-`d` vector. Plain vector data uses `d = 1`.

pub mod activation;
pub mod data;
pub mod error;
pub mod experiments;
pub mod ffn;
pub mod gradcheck;
pub mod matrix;
pub mod metrics;
pub mod model_io;
pub mod prng;
pub mod rbm;
pub mod stack;

pub use activation::{ActivationKind, ActivationMap};
pub use error::{Error, Result};
pub use ffn::{FdRates, FfnLayer, Rate};
pub use matrix::Matrix;
pub use prng::{DistSpec, Prng};
pub use rbm::{EnergyVariant, LearningRate, RbmParams, Scheme, TrainConfig};
pub use stack::{RbmStack, StackSpec};
