//! Fixtures shared by the benchmarks.

use datamap::{ActivationKind, Matrix, Prng, RbmParams};

/// A layer of the MNIST desk-scale shape, 784 visible and 49 hidden.
pub fn desk_layer(act_h: ActivationKind, act_v: ActivationKind) -> RbmParams {
    RbmParams::init(784, 49, 1, act_h.into(), act_v.into(), &mut Prng::new(7)).expect("valid shape")
}

/// A pseudo-image with pixels in `[0,1]`.
pub fn image(seed: u64) -> Matrix {
    let mut p = Prng::new(seed);
    Matrix::from_fn(784, 1, |_, _| p.uniform(0.0, 1.0)).expect("finite pixels")
}

pub fn square(n: usize, seed: u64) -> Matrix {
    let mut p = Prng::new(seed);
    Matrix::from_fn(n, n, |_, _| p.uniform(-1.0, 1.0)).expect("finite entries")
}
