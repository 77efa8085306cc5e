//! The sequence scans and the reconstruction measurements used on image
//! data.

use rayon::prelude::*;

use crate::activation::ActivationKind;
use crate::data::{SequenceSet, WindowLayout};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::metrics::{mean_mse, CurvePoint, ErrorCurve};
use crate::prng::Prng;
use crate::rbm::{self, LearningRate, RbmParams, Scheme, TrainConfig};
use crate::stack::RbmStack;

pub const COLLINEARITY_NODES: [usize; 12] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];
pub const FEATURE_DIMS: [usize; 8] = [25, 30, 35, 40, 45, 50, 55, 60];

/// Settings shared by both sequence scans.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub seed: u64,
    pub epochs: usize,
    /// Step for the weights.
    pub rate: f64,
    /// Bias steps are `rate · bias_scale · d`: a bias entry sees one column
    /// of the error where a weight sees a sum over all `d`.
    pub bias_scale: f64,
    pub scheme: Scheme,
    pub standardize: bool,
    pub window_len: usize,
    pub stride: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            epochs: 100,
            rate: 0.002,
            bias_scale: 1.0,
            scheme: Scheme::Gd,
            standardize: true,
            window_len: 50,
            stride: 20,
        }
    }
}

impl ScanConfig {
    /// Element-dependent rates for an `m`-visible, `n`-hidden layer over
    /// `d` columns.
    pub fn rates(&self, m: usize, n: usize, d: usize) -> LearningRate {
        let bias = self.rate * self.bias_scale * d as f64;
        LearningRate::PerElement {
            visible: Matrix::filled(m, d, bias),
            hidden: Matrix::filled(n, d, bias),
            weights: Matrix::filled(n, m, self.rate),
        }
    }

    pub fn samples(&self, layout: WindowLayout) -> Result<Vec<Matrix>> {
        let mut set = SequenceSet::generate(self.seed);
        if self.standardize {
            set.standardize();
        }
        Ok(set.window(self.window_len, self.stride, layout)?.samples)
    }
}

/// Trains an identity-activation layer of `hidden` nodes on `samples` and
/// returns its mean reconstruction mse. `index` offsets the seed.
pub fn fit_identity(samples: &[Matrix], hidden: usize, index: usize, config: &ScanConfig) -> Result<f64> {
    let (m, d) = samples[0].shape();
    let seed = config.seed.wrapping_add(index as u64);
    let params = RbmParams::init(
        m,
        hidden,
        d,
        ActivationKind::Identity.into(),
        ActivationKind::Identity.into(),
        &mut Prng::new(seed),
    )?;
    let train_config = TrainConfig {
        scheme: config.scheme,
        rate: config.rates(m, hidden, d),
        epochs: config.epochs,
        seed,
        ..TrainConfig::default()
    };
    let out = rbm::train(params, samples, &train_config, &mut |_, _| {})?;
    rbm_mse(&out.params, samples)
}

fn scan(samples: &[Matrix], sweep: &[usize], config: &ScanConfig) -> Result<ErrorCurve> {
    let results: Vec<Result<CurvePoint>> = sweep
        .par_iter()
        .enumerate()
        .map(|(i, &n)| match fit_identity(samples, n, i, config) {
            Ok(mse) => Ok(CurvePoint::new(n, mse)),
            Err(e) if e.is_numerical() => Ok(CurvePoint::diverged(n)),
            Err(e) => Err(e),
        })
        .collect();
    Ok(ErrorCurve {
        points: results.into_iter().collect::<Result<_>>()?,
    })
}

/// Reconstruction error against the number of hidden nodes, each sequence
/// a node carrying a window (`12×len` samples).
pub fn collinearity_scan(config: &ScanConfig, nodes: &[usize]) -> Result<ErrorCurve> {
    scan(&config.samples(WindowLayout::NodesByTime)?, nodes, config)
}

/// Reconstruction error against the feature dimension, each window a
/// `len×12` sample.
pub fn feature_scan(config: &ScanConfig, dims: &[usize]) -> Result<ErrorCurve> {
    scan(&config.samples(WindowLayout::TimeByNodes)?, dims, config)
}

/// Mean per-sample mse of one round trip.
pub fn rbm_mse(params: &RbmParams, samples: &[Matrix]) -> Result<f64> {
    let recon = samples
        .iter()
        .map(|x| params.round_trip(x).map(|s| s.x_post))
        .collect::<Result<Vec<_>>>()?;
    mean_mse(&recon, samples)
}

/// Mean per-sample mse of a full encode/decode.
pub fn stack_mse(stack: &RbmStack, samples: &[Matrix]) -> Result<f64> {
    let recon = samples
        .iter()
        .map(|x| stack.reconstruct(x))
        .collect::<Result<Vec<_>>>()?;
    mean_mse(&recon, samples)
}

/// Random `W`, `B_h` and `x0` with `B_v` solved so that the round trip
/// reproduces `x0` exactly (up to rounding). The visible activation is the
/// identity, which makes the solve a subtraction.
pub fn exact_minimum(
    seed: u64,
    (m, n, d): (usize, usize, usize),
    act_h: ActivationKind,
) -> Result<(RbmParams, Matrix)> {
    let mut p = Prng::new(seed);
    let mut unit = |r, c| Matrix::from_fn(r, c, |_, _| p.uniform(-1.0, 1.0));
    let w = unit(n, m)?;
    let b_h = unit(n, d)?;
    let x0 = unit(m, d)?;
    let zero = RbmParams::from_parts(
        w,
        b_h,
        Matrix::zeros(m, d),
        act_h.into(),
        ActivationKind::Identity.into(),
    )?;
    let (_, y) = zero.project(&x0)?;
    let (x_pre, _) = zero.reconstruct(&y)?;
    let b_v = x0.sub(&x_pre)?;
    let params = zero.with_biases(zero.hidden_bias().clone(), b_v)?;
    Ok((params, x0))
}

/// `params + t·direction`, blockwise.
pub fn displace(params: &RbmParams, direction: &RbmParams, t: f64) -> Result<RbmParams> {
    let step = |a: &Matrix, b: &Matrix| a.add(&b.scale(t)?);
    params
        .with_weights(step(params.weights(), direction.weights())?)?
        .with_biases(
            step(params.hidden_bias(), direction.hidden_bias())?,
            step(params.visible_bias(), direction.visible_bias())?,
        )
}

fn update(before: &RbmParams, after: &RbmParams) -> Result<[Matrix; 3]> {
    Ok([
        before.weights().sub(after.weights())?,
        before.hidden_bias().sub(after.hidden_bias())?,
        before.visible_bias().sub(after.visible_bias())?,
    ])
}

/// One point on the FD-versus-GD path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapPoint {
    pub t: f64,
    /// `‖X̃₁ − X₀‖`
    pub delta_x: f64,
    /// Frobenius norm of the difference between the unit-rate FD and GD
    /// updates, over all three parameter blocks.
    pub gap: f64,
    /// Inner product of the FD update with the energy gradient.
    pub alignment: f64,
}

/// Moves away from an [`exact_minimum`] along a random direction by each
/// `t` and compares one FD step to one GD step there.
pub fn fd_gd_gap(seed: u64, shape: (usize, usize, usize), act_h: ActivationKind, ts: &[f64]) -> Result<Vec<GapPoint>> {
    let (star, x0) = exact_minimum(seed, shape, act_h)?;
    let (m, n, d) = shape;
    let mut p = Prng::new(seed ^ 0x5eed);
    let mut unit = |r, c| Matrix::from_fn(r, c, |_, _| p.uniform(-1.0, 1.0));
    let direction = RbmParams::from_parts(
        unit(n, m)?,
        unit(n, d)?,
        unit(m, d)?,
        act_h.into(),
        ActivationKind::Identity.into(),
    )?;
    ts.iter()
        .map(|&t| {
            let params = displace(&star, &direction, t)?;
            let (gd, _) = rbm::gd_step(&params, &x0, &TrainConfig::gd(1.0))?;
            let (fd, _) = rbm::fd_step(&params, &x0, &TrainConfig::fd(1.0))?;
            let gd = update(&params, &gd)?;
            let fd = update(&params, &fd)?;
            let gap = gd
                .iter()
                .zip(&fd)
                .map(|(a, b)| a.sub(b).map(|m| m.frob_sq()))
                .sum::<Result<f64>>()?
                .sqrt();
            let g = params.gradients(&x0, crate::rbm::EnergyVariant::Raw)?;
            let alignment = [g.w, g.b_h, g.b_v]
                .iter()
                .zip(&fd)
                .map(|(a, b)| a.hadamard(b).map(|m| m.sum()))
                .sum::<Result<f64>>()?;
            let delta_x = params.round_trip(&x0)?.delta_x.frob();
            Ok(GapPoint {
                t,
                delta_x,
                gap,
                alignment,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// True when the `window`-point moving average of `trace` never rises.
pub fn smoothed_nonincreasing(trace: &[f64], window: usize) -> bool {
    let window = window.max(1);
    if trace.len() < window {
        return true;
    }
    let means: Vec<f64> = trace
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();
    means.windows(2).all(|p| p[1] <= p[0])
}
