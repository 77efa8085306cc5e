use datamap::experiments::{rbm_mse, stack_mse};
use datamap::rbm::train;
use datamap::stack::train_greedy;
use datamap::ActivationKind::Identity;
use datamap::{Matrix, Prng, RbmParams, StackSpec, TrainConfig};

/// 8-dimensional samples spanning a 3-dimensional subspace.
fn rank3(seed: u64, count: usize) -> Vec<Matrix> {
    let mut p = Prng::new(seed);
    let basis = Matrix::from_fn(8, 3, |_, _| p.normal(0.0, 1.0)).unwrap();
    (0..count)
        .map(|_| {
            let c = Matrix::from_fn(3, 1, |_, _| p.normal(0.0, 1.0)).unwrap();
            basis.matmul(&c).unwrap().scale(0.3).unwrap()
        })
        .collect()
}

#[test]
fn deeper_linear_stack_is_no_worse() {
    let data = rank3(11, 60);
    let config = TrainConfig::gd(0.01).with_epochs(300).with_seed(5);
    let params = RbmParams::init(8, 8, 1, Identity.into(), Identity.into(), &mut Prng::new(5)).unwrap();
    let single = train(params, &data, &config, &mut |_, _| {}).unwrap();
    let single_mse = rbm_mse(&single.params, &data).unwrap();

    let spec = StackSpec::uniform(&[8, 8, 8], Identity, Identity).unwrap();
    let stacked = train_greedy(&spec, &data, &config, &mut |_| {}).unwrap();
    let stacked_mse = stack_mse(&stacked.stack, &data).unwrap();
    assert!(stacked_mse <= single_mse + 1e-8, "{stacked_mse} vs {single_mse}");
    assert!(single_mse < 1e-6);
}

#[test]
fn stack_energies_are_finite_and_recorded() {
    let data = rank3(3, 20);
    let spec = StackSpec::relu_softsign(&[8, 6, 3]).unwrap();
    let out = train_greedy(&spec, &data, &TrainConfig::fd(0.005).with_epochs(4), &mut |_| {}).unwrap();
    assert_eq!(out.energies.len(), 2);
    assert!(out
        .energies
        .iter()
        .all(|e| e.len() == 4 && e.iter().all(|v| v.is_finite())));
    assert_eq!(out.stack.encode(&data[0]).unwrap().shape(), (3, 1));
}
