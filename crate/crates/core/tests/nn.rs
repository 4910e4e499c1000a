use odec::nn::{
    categorical_head, finite_diff_check, gradient_check, projection, Activation, Adam,
    Categorical, Mlp, NnError,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_net(sizes: &[usize], seed: u64) -> Mlp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Mlp::zeros(sizes, Activation::Tanh, Activation::Linear).unwrap();
    for p in net.params_mut() {
        *p = rng.gen_range(-1.0..1.0);
    }
    net
}

/// Straight-line evaluation reading the documented parameter layout.
fn reference_forward(net: &Mlp, input: &[f64]) -> Vec<f64> {
    let sizes = net.sizes();
    let p = net.params();
    let mut offset = 0;
    let mut x = input.to_vec();
    for l in 0..sizes.len() - 1 {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let mut y = vec![0.0; n_out];
        for o in 0..n_out {
            let mut z = p[offset + n_in * n_out + o];
            for i in 0..n_in {
                z += p[offset + o * n_in + i] * x[i];
            }
            y[o] = if l + 2 == sizes.len() { z } else { z.tanh() };
        }
        offset += n_in * n_out + n_out;
        x = y;
    }
    x
}

#[test]
fn zero_network_outputs_zero() {
    let net = Mlp::zeros(&[3, 5, 2], Activation::Tanh, Activation::Linear).unwrap();
    assert_eq!(net.predict(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
}

#[test]
fn identity_layer_passes_input_through() {
    let mut net = Mlp::zeros(&[3, 3], Activation::Linear, Activation::Linear).unwrap();
    for i in 0..3 {
        net.params_mut()[i * 3 + i] = 1.0;
    }
    assert_eq!(net.predict(&[0.5, -1.5, 2.0]).unwrap(), vec![0.5, -1.5, 2.0]);
}

#[test]
fn forward_matches_reference_evaluation() {
    let net = random_net(&[4, 8, 2], 7);
    let input = [0.3, -0.2, 0.9, -1.1];
    let (out, cache) = net.forward(&input).unwrap();
    let reference = reference_forward(&net, &input);
    for (a, b) in out.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(cache.output(), out.as_slice());
    assert!(matches!(
        net.forward(&[1.0]),
        Err(NnError::ShapeError { expected: 4, found: 1 })
    ));
}

#[test]
fn backward_trivial_cases() {
    let net = random_net(&[4, 8, 2], 3);
    let (_, cache) = net.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert!(net.backward(&cache, &[0.0, 0.0]).unwrap().iter().all(|&g| g == 0.0));

    let linear = {
        let mut n = Mlp::zeros(&[3, 2], Activation::Linear, Activation::Linear).unwrap();
        n.params_mut().copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 0.5, -0.5]);
        n
    };
    let input = [0.7, -0.3, 1.9];
    let (_, cache) = linear.forward(&input).unwrap();
    let g = linear.backward(&cache, &[1.0, 0.0]).unwrap();
    assert_eq!(&g[0..3], &input);
    assert_eq!(&g[3..6], &[0.0, 0.0, 0.0]);
    assert_eq!(&g[6..8], &[1.0, 0.0]);
}

#[test]
fn finite_differences() {
    let mut linear = random_net(&[4, 3], 5);
    linear = {
        let mut n = Mlp::zeros(&[4, 3], Activation::Linear, Activation::Linear).unwrap();
        n.params_mut().copy_from_slice(linear.params());
        n
    };
    let input = [0.5, -0.25, 1.0, 2.0];
    assert!(finite_diff_check(&linear, &input, 1e-3).unwrap() <= 1e-10);

    let net = random_net(&[4, 8, 4], 11);
    assert!(finite_diff_check(&net, &input, 1e-5).unwrap() < 1e-4);

    // Doubling one weight's gradient is caught.
    let w = projection(4);
    let (_, cache) = net.forward(&input).unwrap();
    let mut grads = net.backward(&cache, &w).unwrap();
    let k = grads.iter().position(|g| g.abs() > 1e-3).unwrap();
    grads[k] *= 2.0;
    let mut probe = net.clone();
    let err = gradient_check(net.params(), &grads, 1e-5, |p| {
        probe.params_mut().copy_from_slice(p);
        probe.predict(&input).unwrap().iter().zip(&w).map(|(o, w)| o * w).sum()
    });
    assert!((err - 1.0).abs() < 1e-3, "{err}");

    assert!(finite_diff_check(&net, &input, 1e-2).is_err());
}

#[test]
fn adam_behaviour() {
    let mut opt = Adam::new(3, 0.01);
    let mut p = vec![1.0, -2.0, 0.5];
    opt.step(&mut p, &[0.0; 3]).unwrap();
    assert_eq!(p, vec![1.0, -2.0, 0.5]);

    // Under a constant gradient the step size settles at the learning rate.
    let mut opt = Adam::new(1, 0.01);
    let mut p = vec![0.0];
    let mut last = 0.0;
    for _ in 0..5000 {
        let before = p[0];
        opt.step(&mut p, &[0.3]).unwrap();
        last = before - p[0];
    }
    assert!((last - 0.01).abs() < 1e-6, "{last}");

    let mut a = Adam::new(2, 0.1);
    let mut b = a.clone();
    let (mut pa, mut pb) = (vec![1.0, 2.0], vec![1.0, 2.0]);
    a.step(&mut pa, &[0.5, -0.5]).unwrap();
    b.step(&mut pb, &[0.5, -0.5]).unwrap();
    assert_eq!(pa, pb);
    assert_eq!(a, b);

    assert_eq!(
        a.step(&mut pa, &[f64::NAN, 0.0]),
        Err(NnError::NonFiniteGradient)
    );
}

#[test]
fn categorical_cases() {
    let d = Categorical::from_logits(&[0.0; 6]).unwrap();
    for p in d.probs() {
        assert!((p - 1.0 / 6.0).abs() < 1e-15);
    }
    assert!((d.log_prob(2) + 6f64.ln()).abs() < 1e-12);
    assert!((d.entropy() - 6f64.ln()).abs() < 1e-12);

    let d = Categorical::from_logits(&[0.0, 1000.0, 0.0]).unwrap();
    assert!((d.probs()[1] - 1.0).abs() < 1e-12);
    assert!(d.entropy().abs() < 1e-12);
    assert_eq!(d.mode(), 1);

    assert_eq!(Categorical::from_logits(&[]), Err(NnError::EmptyLogits));
    assert_eq!(
        Categorical::from_logits(&[0.0, f64::INFINITY]),
        Err(NnError::NonFiniteLogits)
    );
}

#[test]
fn categorical_sampling_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let logits = [0.0, 2f64.ln()];
    let n = 1_000_000;
    let mut ones = 0usize;
    for _ in 0..n {
        let (a, lp) = categorical_head(&logits, &mut rng).unwrap();
        let expected = if a == 1 { (2.0f64 / 3.0).ln() } else { (1.0f64 / 3.0).ln() };
        assert!((lp - expected).abs() < 1e-12);
        ones += a;
    }
    let f1 = ones as f64 / n as f64;
    assert!((f1 - 2.0 / 3.0).abs() < 0.005, "{f1}");
}

#[test]
fn categorical_gradients_match_finite_differences() {
    let logits = vec![0.3, -1.2, 0.8, 0.1];
    let d = Categorical::from_logits(&logits).unwrap();
    let err = gradient_check(&logits, &d.log_prob_grad(2), 1e-6, |z| {
        Categorical::from_logits(z).unwrap().log_prob(2)
    });
    assert!(err < 1e-6);
    let err = gradient_check(&logits, &d.entropy_grad(), 1e-6, |z| {
        Categorical::from_logits(z).unwrap().entropy()
    });
    assert!(err < 1e-6);
}

proptest! {
    #[test]
    fn softmax_normalizes(logits in prop::collection::vec(-30.0f64..30.0, 1..10)) {
        let d = Categorical::from_logits(&logits).unwrap();
        prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let h = d.entropy();
        prop_assert!(h >= -1e-12 && h <= (logits.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact(seed in any::<u64>(), hidden in 1usize..10) {
        let net = random_net(&[3, hidden, 2], seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        net.save(&path).unwrap();
        let back = Mlp::load(&path).unwrap();
        prop_assert_eq!(back.params().len(), net.params().len());
        for (a, b) in back.params().iter().zip(net.params()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back.sizes(), net.sizes());
    }
}
