//! Checks the analytic round-trip gradients against numerical
//! differentiation of the energy.
//!
//! Numerical derivatives use the fourth-order central stencil
//! `(−f(2h) + 8f(h) − 8f(−h) + f(−2h)) / 12h`, which is exact for the
//! quartic energies of the identity case up to rounding. The error of one
//! parameter block is [`relative`], and a cell reports the worst block over
//! all its seeds.
//!
//! Relu has no derivative at 0 and softsign no second derivative there, which
//! the stencil needs, so instances are repaired before checking: any
//! pre-activation within [`KINK_MARGIN`] of 0 has its bias moved to put it
//! `2·KINK_MARGIN` past 0 on the same side.

use crate::activation::{ActivationKind, ActivationMap};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::prng::Prng;
use crate::rbm::{EnergyVariant, RbmParams};

pub const STEP: f64 = 1e-4;
pub const KINK_MARGIN: f64 = 1e-3;
pub const ERROR_FLOOR: f64 = 1e-3;
pub const TOLERANCE: f64 = 1e-6;
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
/// `(m, n, d)`
pub const SHAPES: [(usize, usize, usize); 2] = [(7, 5, 1), (6, 4, 3)];

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub act_h: ActivationKind,
    pub act_v: ActivationKind,
    pub shape: (usize, usize, usize),
    pub max_error: f64,
    /// Pre-activations moved off a kink, summed over seeds.
    pub repairs: usize,
}

impl CellResult {
    pub fn tolerance(&self) -> f64 {
        if self.act_h == ActivationKind::Identity && self.act_v == ActivationKind::Identity {
            IDENTITY_TOLERANCE
        } else {
            TOLERANCE
        }
    }

    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    pub cells: Vec<CellResult>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(CellResult::passed)
    }

    pub fn max_error(&self) -> f64 {
        self.cells.iter().map(|c| c.max_error).fold(0.0, f64::max)
    }
}

/// `‖a − n‖ / max(‖a‖, ‖n‖, ERROR_FLOOR)` in the Frobenius norm.
pub fn relative(a: &Matrix, n: &Matrix) -> Result<f64> {
    Ok(a.sub(n)?.frob() / a.frob().max(n.frob()).max(ERROR_FLOOR))
}

fn push_off_kink(pre: &Matrix, bias: &Matrix, act: ActivationKind) -> Result<(Matrix, usize)> {
    if !matches!(act, ActivationKind::Relu | ActivationKind::Softsign) {
        return Ok((bias.clone(), 0));
    }
    let mut out = bias.clone();
    let mut repairs = 0;
    for i in 0..pre.rows() {
        for j in 0..pre.cols() {
            let p = pre.get(i, j);
            if p.abs() < KINK_MARGIN {
                let side = if p < 0.0 { -1.0 } else { 1.0 };
                out.set(i, j, bias.get(i, j) + side * 2.0 * KINK_MARGIN - p)?;
                repairs += 1;
            }
        }
    }
    Ok((out, repairs))
}

/// A unit-scale random instance with kinks repaired.
pub fn instance(
    seed: u64,
    (m, n, d): (usize, usize, usize),
    act_h: ActivationKind,
    act_v: ActivationKind,
) -> Result<(RbmParams, Matrix, usize)> {
    let mut p = Prng::new(seed);
    let mut unit = |r, c| Matrix::from_fn(r, c, |_, _| p.uniform(-1.0, 1.0));
    let w = unit(n, m)?;
    let b_h = unit(n, d)?;
    let b_v = unit(m, d)?;
    let x0 = unit(m, d)?;
    let params = RbmParams::from_parts(w, b_h, b_v, act_h.into(), act_v.into())?;
    let (y_pre, _) = params.project(&x0)?;
    let (b_h, fixed_h) = push_off_kink(&y_pre, params.hidden_bias(), act_h)?;
    let params = params.with_biases(b_h, params.visible_bias().clone())?;
    let (_, y) = params.project(&x0)?;
    let (x_pre, _) = params.reconstruct(&y)?;
    let (b_v, fixed_v) = push_off_kink(&x_pre, params.visible_bias(), act_v)?;
    let params = params.with_biases(params.hidden_bias().clone(), b_v)?;
    Ok((params, x0, fixed_h + fixed_v))
}

#[derive(Clone, Copy)]
enum Block {
    W,
    Hidden,
    Visible,
}

fn perturbed(params: &RbmParams, block: Block, i: usize, j: usize, delta: f64) -> Result<RbmParams> {
    let bump = |m: &Matrix| -> Result<Matrix> {
        let mut out = m.clone();
        out.set(i, j, m.get(i, j) + delta)?;
        Ok(out)
    };
    match block {
        Block::W => params.with_weights(bump(params.weights())?),
        Block::Hidden => params.with_biases(bump(params.hidden_bias())?, params.visible_bias().clone()),
        Block::Visible => params.with_biases(params.hidden_bias().clone(), bump(params.visible_bias())?),
    }
}

/// Fourth-order central derivative of the energy along one parameter.
pub fn numeric_derivative(
    params: &RbmParams,
    x0: &Matrix,
    variant: EnergyVariant,
    block: usize,
    i: usize,
    j: usize,
) -> Result<f64> {
    let block = [Block::W, Block::Hidden, Block::Visible][block];
    let e = |k: f64| -> Result<f64> { perturbed(params, block, i, j, k * STEP)?.energy(x0, variant) };
    Ok((-e(2.0)? + 8.0 * e(1.0)? - 8.0 * e(-1.0)? + e(-2.0)?) / (12.0 * STEP))
}

/// Worst per-block error between analytic and numerical gradients.
pub fn check_instance(params: &RbmParams, x0: &Matrix, variant: EnergyVariant) -> Result<f64> {
    let g = params.gradients(x0, variant)?;
    let mut worst: f64 = 0.0;
    for (b, analytic) in [&g.w, &g.b_h, &g.b_v].into_iter().enumerate() {
        let numeric = Matrix::from_fn(analytic.rows(), analytic.cols(), |i, j| {
            numeric_derivative(params, x0, variant, b, i, j).unwrap_or(f64::NAN)
        })
        .map_err(|_| crate::error::Error::NonFinite("numerical gradient"))?;
        worst = worst.max(relative(analytic, &numeric)?);
    }
    Ok(worst)
}

/// Every activation pair × [`SHAPES`], each over `seeds` instances seeded
/// `0..seeds`.
pub fn run(seeds: u64) -> Result<GradcheckReport> {
    let mut cells = Vec::new();
    for act_h in ActivationKind::ALL {
        for act_v in ActivationKind::ALL {
            for shape in SHAPES {
                let mut max_error: f64 = 0.0;
                let mut repairs = 0;
                for seed in 0..seeds {
                    let (params, x0, fixed) = instance(seed, shape, act_h, act_v)?;
                    repairs += fixed;
                    max_error = max_error.max(check_instance(&params, &x0, EnergyVariant::Raw)?);
                }
                cells.push(CellResult {
                    act_h,
                    act_v,
                    shape,
                    max_error,
                    repairs,
                });
            }
        }
    }
    Ok(GradcheckReport { cells })
}

/// Same check for a caller-built activation layout.
pub fn check_maps(
    seed: u64,
    shape: (usize, usize, usize),
    act_h: ActivationMap,
    act_v: ActivationMap,
    variant: EnergyVariant,
) -> Result<f64> {
    let (params, x0, _) = instance(seed, shape, ActivationKind::Identity, ActivationKind::Identity)?;
    let params = RbmParams::from_parts(
        params.weights().clone(),
        params.hidden_bias().clone(),
        params.visible_bias().clone(),
        act_h,
        act_v,
    )?;
    check_instance(&params, &x0, variant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind::*;

    #[test]
    fn kink_repair() {
        let pre = Matrix::column(&[0.0, -2e-4, 5e-4, 0.5]).unwrap();
        let bias = Matrix::column(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        let (fixed, count) = push_off_kink(&pre, &bias, Relu).unwrap();
        assert_eq!(count, 3);
        let moved = pre.add(&fixed.sub(&bias).unwrap()).unwrap();
        let expect = [2e-3, -2e-3, 2e-3, 0.5];
        for (a, b) in moved.as_slice().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(push_off_kink(&pre, &bias, Sigmoid).unwrap(), (bias, 0));
    }

    #[test]
    fn instances_stay_off_kinks() {
        for seed in 0..200 {
            for shape in SHAPES {
                let (params, x0, _) = instance(seed, shape, Relu, Softsign).unwrap();
                let (yp, y) = params.project(&x0).unwrap();
                let (xp, _) = params.reconstruct(&y).unwrap();
                assert!(yp
                    .as_slice()
                    .iter()
                    .chain(xp.as_slice())
                    .all(|v| v.abs() >= KINK_MARGIN * 0.999));
            }
        }
        let (_, _, none) = instance(3, (7, 5, 1), Sigmoid, Identity).unwrap();
        assert_eq!(none, 0);
    }

    #[test]
    fn identity_cell_is_tight() {
        for seed in 0..5 {
            let (p, x0, _) = instance(seed, (6, 4, 3), Identity, Identity).unwrap();
            assert!(check_instance(&p, &x0, EnergyVariant::Raw).unwrap() <= IDENTITY_TOLERANCE);
        }
    }

    #[test]
    fn detects_a_wrong_gradient() {
        // A mismatched energy variant flips the target and must be caught.
        let (p, x0, _) = instance(1, (7, 5, 1), Softsign, Sigmoid).unwrap();
        let g = p.gradients(&x0, EnergyVariant::Recirculation).unwrap();
        let n = Matrix::from_fn(7, 1, |i, _| {
            numeric_derivative(&p, &x0, EnergyVariant::Raw, 2, i, 0).unwrap()
        })
        .unwrap();
        assert!(relative(&g.b_v, &n).unwrap() > 1e-3);
    }

    #[test]
    fn recirculation_and_mixed_maps() {
        let h = ActivationMap::PerNode(vec![Softsign, Relu, Sigmoid, Identity]);
        let v = ActivationMap::PerNode(vec![Sigmoid, Softsign, Identity, Sigmoid, Softsign, Identity]);
        for seed in 0..5 {
            let err = check_maps(seed, (6, 4, 3), h.clone(), v.clone(), EnergyVariant::Recirculation).unwrap();
            assert!(err <= TOLERANCE, "{err:e}");
        }
    }
}
