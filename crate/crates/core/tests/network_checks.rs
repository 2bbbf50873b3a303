use nsd_core::datasets::linearly_separable;
use nsd_core::nn::{grad_check, softmax_cross_entropy, MlpSpec, Network, Phase, Regularizer, Sgd, SgdConfig, GRAD_CHECK_EPSILON};
use nsd_core::nsdropout::{Deviation, MaskSelection};
use nsd_core::{Matrix, Rng};

fn mnist_like(rng: &mut Rng, n: usize) -> (Matrix<f64>, Vec<usize>) {
    // sparse [0, 1] pixels, roughly like digit strokes
    let data = (0..n * 784).map(|_| if rng.next_uniform() < 0.2 { rng.next_uniform() } else { 0.0 }).collect();
    (Matrix::new(n, 784, data).unwrap(), (0..n).map(|i| i % 3).collect())
}

#[test]
fn grad_check_784_8_8_3() {
    for regularizer in [Regularizer::None, Regularizer::Dropout, Regularizer::NsDropout(Deviation::Absolute)] {
        let mut rng = Rng::new(77);
        let mut spec = MlpSpec::new(vec![784, 8, 8, 3]);
        spec.regularizer = regularizer;
        spec.p = vec![0.0, 0.25, 0.25];
        let mut net = Network::<f64>::mlp(&spec, &mut rng).unwrap();
        let (x, labels) = mnist_like(&mut rng, 12);
        let (xv, lv) = mnist_like(&mut rng, 6);
        net.refresh_masks(&x, &labels, &xv, &lv).unwrap();
        let report = grad_check(&mut net, &x, &labels, GRAD_CHECK_EPSILON, None, &mut rng).unwrap();
        assert!(report.max_relative_error < 1e-5, "{regularizer:?}: {report:?}");
        assert!(report.checked > net.parameter_count() * 9 / 10, "{report:?}");
    }
}

#[test]
fn loss_falls_over_ten_full_batch_epochs() {
    let data = linearly_separable::<f64>(200, 3).unwrap();
    let mut rng = Rng::new(4);
    let mut net = Network::<f64>::mlp(&MlpSpec::new(vec![2, 16, 2]), &mut rng).unwrap();
    let sgd = Sgd::new(SgdConfig::default()).unwrap();
    let mut losses = Vec::new();
    for _ in 0..10 {
        let logits = net.forward(&data.images, Phase::Train, MaskSelection::Off, None).unwrap();
        let (loss, g) = softmax_cross_entropy(&logits, &data.labels).unwrap();
        losses.push(loss);
        net.backward(&g).unwrap();
        sgd.step(&mut net).unwrap();
    }
    assert!(losses[9] < losses[0], "{losses:?}");
}
