//! Compare backpropagated gradients of a small network with central
//! finite differences.
//!
//! ```text
//! cargo run --example gradient_check
//! ```

use dsge_lab::nn::Network;
use ndarray::Array2;

fn loss(net: &Network, x: &Array2<f64>) -> f64 {
    let y = net.predict(x.view()).unwrap();
    0.5 * y.iter().map(|v| v * v).sum::<f64>()
}

fn main() -> dsge_lab::Result<()> {
    let mut net = Network::new(&[4, 8, 8, 2], 3)?;
    let x = Array2::from_shape_fn((5, 4), |(i, j)| ((i * 4 + j) as f64 * 0.37).sin());
    let (y, cache) = net.forward(x.view())?;
    let (grads, _) = net.backward(&cache, y.view())?;
    let analytic: Vec<f64> = grads
        .w
        .iter()
        .zip(&grads.b)
        .flat_map(|(w, b)| w.iter().chain(b.iter()).copied())
        .collect();

    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for (k, &g) in analytic.iter().enumerate() {
        let orig = *net.params().nth(k).unwrap();
        *net.params_mut().nth(k).unwrap() = orig + h;
        let up = loss(&net, &x);
        *net.params_mut().nth(k).unwrap() = orig - h;
        let down = loss(&net, &x);
        *net.params_mut().nth(k).unwrap() = orig;
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - g).abs() / fd.abs().max(g.abs()).max(1e-8));
    }
    println!(
        "{} parameters, worst relative error {worst:.2e}",
        net.num_params()
    );
    Ok(())
}
