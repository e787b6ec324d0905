//! Backpropagation against finite differences, plus optimizer behaviour.

use dsge_lab::nn::{Adam, Network};
use ndarray::Array2;
use proptest::prelude::*;

fn flat(g: &dsge_lab::nn::Grads) -> Vec<f64> {
    g.w.iter()
        .zip(&g.b)
        .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
        .collect()
}

/// Loss `sum(y * target)` so the output gradient is `target`.
fn linear_loss(net: &Network, x: &Array2<f64>, target: &Array2<f64>) -> f64 {
    let y = net.predict(x.view()).unwrap();
    (&y * target).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn backward_matches_central_differences(
        hidden in prop::collection::vec(2usize..12, 1..4),
        inp in 1usize..6, out in 1usize..4, batch in 1usize..6, seed in 0u64..10_000,
    ) {
        let mut dims = vec![inp];
        dims.extend(hidden);
        dims.push(out);
        let mut net = Network::new(&dims, seed).unwrap();
        // keep pre-activations off the ReLU kink when a whole layer is dead
        for (l, layer) in net.layers.iter_mut().enumerate() {
            for (k, b) in layer.b.iter_mut().enumerate() {
                *b += 0.05 * (1.0 + l as f64 + 0.37 * k as f64).sin();
            }
        }
        let x = Array2::from_shape_fn((batch, inp), |(i, j)| ((seed as f64 + 1.3 * i as f64 + 0.7 * j as f64) * 0.91).sin());
        let target = Array2::from_shape_fn((batch, out), |(i, j)| ((i + 2 * j) as f64 * 0.53).cos());
        let (_, cache) = net.forward(x.view()).unwrap();
        let (g, gx) = net.backward(&cache, target.view()).unwrap();
        let an = flat(&g);
        let h = 1e-6;
        for (k, &a) in an.iter().enumerate() {
            let orig = *net.params().nth(k).unwrap();
            *net.params_mut().nth(k).unwrap() = orig + h;
            let up = linear_loss(&net, &x, &target);
            *net.params_mut().nth(k).unwrap() = orig - h;
            let down = linear_loss(&net, &x, &target);
            *net.params_mut().nth(k).unwrap() = orig;
            let fd = (up - down) / (2.0 * h);
            prop_assert!((fd - a).abs() <= 1e-4 * fd.abs().max(a.abs()).max(1e-4), "param {}: {} vs {}", k, a, fd);
        }
        // input gradient too
        for i in 0..batch {
            for j in 0..inp {
                let mut xp = x.clone();
                xp[[i, j]] += h;
                let mut xm = x.clone();
                xm[[i, j]] -= h;
                let fd = (linear_loss(&net, &xp, &target) - linear_loss(&net, &xm, &target)) / (2.0 * h);
                prop_assert!((fd - gx[[i, j]]).abs() <= 1e-4 * fd.abs().max(1e-4));
            }
        }
    }
}

#[test]
fn adam_fits_a_linear_map() {
    let mut net = Network::new(&[2, 16, 1], 5).unwrap();
    let mut opt = Adam::new(&net, 1e-2);
    let x = Array2::from_shape_fn((64, 2), |(i, j)| ((i * 3 + j * 7) % 17) as f64 / 8.5 - 1.0);
    let y = x.column(0).mapv(|v| 2.0 * v) - x.column(1).mapv(|v| 0.5 * v);
    let mse = |net: &Network| {
        let p = net.predict(x.view()).unwrap();
        p.column(0)
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / 64.0
    };
    let start = mse(&net);
    for _ in 0..2000 {
        let (p, cache) = net.forward(x.view()).unwrap();
        let mut grad = p.clone();
        for i in 0..64 {
            grad[[i, 0]] = 2.0 * (p[[i, 0]] - y[i]) / 64.0;
        }
        let (g, _) = net.backward(&cache, grad.view()).unwrap();
        opt.step(&mut net, &g);
    }
    let end = mse(&net);
    assert!(end < 1e-3 && end < start / 100.0, "{start} -> {end}");
}

#[test]
fn same_seed_same_network() {
    let a = Network::new(&[8, 32, 32, 6], 42).unwrap();
    let b = Network::new(&[8, 32, 32, 6], 42).unwrap();
    let c = Network::new(&[8, 32, 32, 6], 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.num_params(), 8 * 32 + 32 + 32 * 32 + 32 + 32 * 6 + 6);
}
