//! Stacks of data mappings trained greedily, one layer at a time.

use crate::activation::{ActivationKind, ActivationMap};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::prng::Prng;
use crate::rbm::{self, RbmParams, TrainConfig};

/// Layer sizes and activations of a stack before training.
#[derive(Debug, Clone, PartialEq)]
pub struct StackSpec {
    /// `sizes[0]` is the input dimension, `sizes[k+1]` the hidden size of
    /// layer `k`.
    pub sizes: Vec<usize>,
    pub act_h: Vec<ActivationMap>,
    pub act_v: Vec<ActivationMap>,
    /// Columns per sample.
    pub cols: usize,
}

impl StackSpec {
    pub fn uniform(sizes: &[usize], act_h: ActivationKind, act_v: ActivationKind) -> Result<Self> {
        let layers = sizes.len().saturating_sub(1);
        Self::new(sizes, vec![act_h.into(); layers], vec![act_v.into(); layers])
    }

    /// Relu on the first visible layer, identity on every other visible
    /// layer, softsign on every hidden layer.
    pub fn relu_softsign(sizes: &[usize]) -> Result<Self> {
        let layers = sizes.len().saturating_sub(1);
        let act_v = (0..layers)
            .map(|k| {
                if k == 0 {
                    ActivationKind::Relu
                } else {
                    ActivationKind::Identity
                }
                .into()
            })
            .collect();
        Self::new(sizes, vec![ActivationKind::Softsign.into(); layers], act_v)
    }

    pub fn new(sizes: &[usize], act_h: Vec<ActivationMap>, act_v: Vec<ActivationMap>) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!("stack sizes {sizes:?}")));
        }
        let layers = sizes.len() - 1;
        if act_h.len() != layers || act_v.len() != layers {
            return Err(Error::InvalidParameter("one activation pair per layer".into()));
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            act_h,
            act_v,
            cols: 1,
        })
    }

    pub fn with_cols(mut self, cols: usize) -> Self {
        self.cols = cols;
        self
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Layer `k` initialized from seed `seed + k`.
    pub fn init_layer(&self, k: usize, seed: u64) -> Result<RbmParams> {
        let mut prng = Prng::new(layer_seed(seed, k));
        RbmParams::init(
            self.sizes[k],
            self.sizes[k + 1],
            self.cols,
            self.act_h[k].clone(),
            self.act_v[k].clone(),
            &mut prng,
        )
    }

    /// Every layer at its initial value, untrained.
    pub fn init(&self, seed: u64) -> Result<RbmStack> {
        let layers = (0..self.layers())
            .map(|k| self.init_layer(k, seed))
            .collect::<Result<_>>()?;
        RbmStack::new(layers)
    }
}

pub fn layer_seed(seed: u64, layer: usize) -> u64 {
    seed.wrapping_add(layer as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbmStack {
    layers: Vec<RbmParams>,
}

impl RbmStack {
    pub fn new(layers: Vec<RbmParams>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("empty stack".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].hidden() != pair[1].visible() || pair[0].cols() != pair[1].cols() {
                return Err(Error::shape(
                    "stack layers",
                    (pair[0].hidden(), pair[0].cols()),
                    (pair[1].visible(), pair[1].cols()),
                ));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[RbmParams] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<RbmParams> {
        self.layers
    }

    /// Bottom-up projection through every layer.
    pub fn encode(&self, x: &Matrix) -> Result<Matrix> {
        let mut cur = x.clone();
        for layer in &self.layers {
            cur = layer.project(&cur)?.1;
        }
        Ok(cur)
    }

    /// Top-down reconstruction through every layer in reverse order.
    pub fn decode(&self, y: &Matrix) -> Result<Matrix> {
        let mut cur = y.clone();
        for layer in self.layers.iter().rev() {
            cur = layer.reconstruct(&cur)?.1;
        }
        Ok(cur)
    }

    pub fn reconstruct(&self, x: &Matrix) -> Result<Matrix> {
        self.decode(&self.encode(x)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StackEvent {
    LayerStart(usize),
    Epoch { layer: usize, epoch: usize, energy: f64 },
    LayerDone(usize),
}

#[derive(Debug, Clone)]
pub struct StackOutcome {
    pub stack: RbmStack,
    /// Per-layer epoch energy traces.
    pub energies: Vec<Vec<f64>>,
}

/// Trains layer 0 on `data`, then each following layer on the hidden
/// outputs of the layer below. Layer `k` is created only after layer `k−1`
/// has finished, and uses seed `config.seed + k` for both initialization and
/// sample order, so a one-layer stack matches a plain [`rbm::train`] run.
pub fn train_greedy(
    spec: &StackSpec,
    data: &[Matrix],
    config: &TrainConfig,
    observer: &mut dyn FnMut(StackEvent),
) -> Result<StackOutcome> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut inputs: Vec<Matrix> = data.to_vec();
    let mut layers = Vec::with_capacity(spec.layers());
    let mut energies = Vec::with_capacity(spec.layers());
    for k in 0..spec.layers() {
        observer(StackEvent::LayerStart(k));
        let params = spec.init_layer(k, config.seed)?;
        let cfg = TrainConfig {
            seed: layer_seed(config.seed, k),
            ..config.clone()
        };
        let out = rbm::train(params, &inputs, &cfg, &mut |epoch, energy| {
            observer(StackEvent::Epoch {
                layer: k,
                epoch,
                energy,
            })
        })?;
        if k + 1 < spec.layers() {
            inputs = inputs
                .iter()
                .map(|x| out.params.project(x).map(|(_, y)| y))
                .collect::<Result<_>>()?;
        }
        observer(StackEvent::LayerDone(k));
        layers.push(out.params);
        energies.push(out.energies);
    }
    Ok(StackOutcome {
        stack: RbmStack::new(layers)?,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activation::ActivationKind::*;

    fn identity_layer(m: usize) -> RbmParams {
        RbmParams::from_parts(
            Matrix::identity(m),
            Matrix::zeros(m, 1),
            Matrix::zeros(m, 1),
            Identity.into(),
            Identity.into(),
        )
        .unwrap()
    }

    #[test]
    fn identity_stack_is_transparent() {
        let stack = RbmStack::new(vec![identity_layer(4), identity_layer(4)]).unwrap();
        let x = Matrix::column(&[0.1, -2.0, 3.5, 0.0]).unwrap();
        assert_eq!(stack.encode(&x).unwrap(), x);
        assert_eq!(stack.reconstruct(&x).unwrap(), x);
    }

    #[test]
    fn encode_decode_match_manual_chain() {
        let spec = StackSpec::relu_softsign(&[12, 8, 5, 3]).unwrap();
        let stack = spec.init(9).unwrap();
        let mut p = Prng::new(1);
        let x = Matrix::from_fn(12, 1, |_, _| p.next_f64()).unwrap();
        let l = stack.layers();
        let y1 = l[0].project(&x).unwrap().1;
        let y2 = l[1].project(&y1).unwrap().1;
        let y3 = l[2].project(&y2).unwrap().1;
        assert_eq!(stack.encode(&x).unwrap(), y3);
        assert_eq!(y3.rows(), 3);
        let x2 = l[2].reconstruct(&y3).unwrap().1;
        let x1 = l[1].reconstruct(&x2).unwrap().1;
        let x0 = l[0].reconstruct(&x1).unwrap().1;
        assert_eq!(stack.decode(&y3).unwrap(), x0);
        assert_eq!(x0.shape(), x.shape());
    }

    #[test]
    fn relu_softsign_activations() {
        let spec = StackSpec::relu_softsign(&[784, 784, 196, 49]).unwrap();
        assert_eq!(spec.layers(), 3);
        assert!(spec.act_v[0].is_all(Relu));
        assert!(spec.act_v[1].is_all(Identity) && spec.act_v[2].is_all(Identity));
        assert!(spec.act_h.iter().all(|a| a.is_all(Softsign)));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(StackSpec::relu_softsign(&[5]).is_err());
        assert!(StackSpec::relu_softsign(&[5, 0]).is_err());
        let mut p = Prng::new(0);
        let a = RbmParams::init(5, 3, 1, Identity.into(), Identity.into(), &mut p).unwrap();
        let b = RbmParams::init(4, 2, 1, Identity.into(), Identity.into(), &mut p).unwrap();
        assert!(RbmStack::new(vec![a, b]).is_err());
        assert!(RbmStack::new(vec![]).is_err());
    }

    #[test]
    fn single_layer_matches_plain_training() {
        let mut p = Prng::new(3);
        let data: Vec<Matrix> = (0..10)
            .map(|_| Matrix::from_fn(6, 1, |_, _| p.next_f64()).unwrap())
            .collect();
        let spec = StackSpec::uniform(&[6, 3], Softsign, Identity).unwrap();
        let cfg = TrainConfig::fd(0.01).with_epochs(5).with_seed(77);
        let stacked = train_greedy(&spec, &data, &cfg, &mut |_| {}).unwrap();

        let mut prng = Prng::new(77);
        let params = RbmParams::init(6, 3, 1, Softsign.into(), Identity.into(), &mut prng).unwrap();
        let plain = rbm::train(params, &data, &cfg, &mut |_, _| {}).unwrap();
        assert_eq!(stacked.stack.layers()[0], plain.params);
        assert_eq!(stacked.energies[0], plain.energies);
    }

    #[test]
    fn layers_train_in_order() {
        let mut p = Prng::new(4);
        let data: Vec<Matrix> = (0..5)
            .map(|_| Matrix::from_fn(6, 1, |_, _| p.next_f64()).unwrap())
            .collect();
        let spec = StackSpec::relu_softsign(&[6, 4, 3, 2]).unwrap();
        let mut events = Vec::new();
        train_greedy(&spec, &data, &TrainConfig::gd(0.01).with_epochs(2), &mut |e| {
            events.push(e)
        })
        .unwrap();
        let mut current = None;
        let mut finished = Vec::new();
        for e in &events {
            match *e {
                StackEvent::LayerStart(k) => {
                    assert_eq!(current, None);
                    assert_eq!(finished.len(), k, "layer {k} started before layers below finished");
                    current = Some(k);
                }
                StackEvent::Epoch { layer, .. } => assert_eq!(current, Some(layer)),
                StackEvent::LayerDone(k) => {
                    assert_eq!(current, Some(k));
                    finished.push(k);
                    current = None;
                }
            }
        }
        assert_eq!(finished, vec![0, 1, 2]);
    }
}
