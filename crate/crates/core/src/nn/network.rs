use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            _ => None,
        }
    }

    pub(crate) fn to_code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
        }
    }
}

/// Dense layer `act(W x + b)` with `W` stored as `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub act: Activation,
}

/// Feed-forward network of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
}

/// Per-layer inputs and pre-activations saved by [`Network::forward`].
#[derive(Debug, Clone)]
pub struct Cache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
}

impl Cache {
    /// Pre-activations of every layer, input side first.
    pub fn pre_activations(&self) -> &[Array2<f64>] {
        &self.pre
    }

    /// Smallest `|z|` over the hidden-layer pre-activations, i.e. the
    /// distance of this batch from the nearest ReLU kink.
    pub fn kink_margin(&self) -> f64 {
        let hidden = self.pre.len().saturating_sub(1);
        self.pre[..hidden]
            .iter()
            .flat_map(|z| z.iter())
            .fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }
}

/// Gradients (or any other quantity) shaped like a network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub w: Vec<Array2<f64>>,
    pub b: Vec<Array1<f64>>,
}

impl Grads {
    pub fn zeros_like(net: &Network) -> Self {
        Grads {
            w: net
                .layers
                .iter()
                .map(|l| Array2::zeros(l.w.raw_dim()))
                .collect(),
            b: net
                .layers
                .iter()
                .map(|l| Array1::zeros(l.b.raw_dim()))
                .collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.w.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.b.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    pub fn add_assign(&mut self, other: &Grads) {
        for (a, b) in self.w.iter_mut().zip(&other.w) {
            *a += b;
        }
        for (a, b) in self.b.iter_mut().zip(&other.b) {
            *a += b;
        }
    }
}

impl Network {
    /// Layer widths `dims = [in, hidden.., out]`. Hidden layers use ReLU,
    /// the output layer is linear. Weights are uniform in
    /// `+-1/sqrt(fan_in)` and biases start at zero.
    pub fn new(dims: &[usize], seed: u64) -> Result<Self> {
        if dims.len() < 3 {
            return Err(Error::Config(
                "a network needs at least one hidden layer".into(),
            ));
        }
        if dims.contains(&0) {
            return Err(Error::Config(format!("zero-width layer in {dims:?}")));
        }
        let mut rng = seeded(seed);
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, d)| {
                let bound = 1.0 / (d[0] as f64).sqrt();
                let w =
                    Array2::from_shape_simple_fn((d[1], d[0]), || rng.random_range(-bound..=bound));
                Layer {
                    w,
                    b: Array1::zeros(d[1]),
                    act: if i == last {
                        Activation::Identity
                    } else {
                        Activation::Relu
                    },
                }
            })
            .collect();
        Ok(Network { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").w.nrows()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.input_dim()];
        d.extend(self.layers.iter().map(|l| l.w.nrows()));
        d
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().all(|v| v.is_finite()) && l.b.iter().all(|v| v.is_finite()))
    }

    /// Forward pass on a batch with one sample per row.
    pub fn forward(&self, x: ArrayView2<f64>) -> Result<(Array2<f64>, Cache)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for layer in &self.layers {
            let z = h.dot(&layer.w.t()) + &layer.b;
            let out = match layer.act {
                Activation::Relu => z.mapv(|v| v.max(0.0)),
                Activation::Identity => z.clone(),
            };
            inputs.push(h);
            pre.push(z);
            h = out;
        }
        Ok((h, Cache { inputs, pre }))
    }

    /// Forward pass without keeping a cache.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward(x)?.0)
    }

    /// Single-sample convenience wrapper.
    pub fn forward_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, x.len()), x).expect("contiguous slice");
        Ok(self.predict(x)?.row(0).to_vec())
    }

    /// Reverse pass for the scalar `sum(output * grad_out)`. Returns the
    /// parameter gradients and the gradient with respect to the input.
    pub fn backward(
        &self,
        cache: &Cache,
        grad_out: ArrayView2<f64>,
    ) -> Result<(Grads, Array2<f64>)> {
        if cache.pre.len() != self.layers.len() {
            return Err(Error::Dimension {
                expected: self.layers.len(),
                got: cache.pre.len(),
            });
        }
        let last = cache.pre.last().expect("non-empty");
        if grad_out.dim() != last.dim() {
            return Err(Error::Dimension {
                expected: last.ncols(),
                got: grad_out.ncols(),
            });
        }
        let mut grads = Grads {
            w: Vec::with_capacity(self.layers.len()),
            b: Vec::with_capacity(self.layers.len()),
        };
        let mut g = grad_out.to_owned();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            if layer.act == Activation::Relu {
                g.zip_mut_with(&cache.pre[i], |gi, &z| {
                    if z <= 0.0 {
                        *gi = 0.0;
                    }
                });
            }
            grads.w.push(g.t().dot(&cache.inputs[i]));
            grads.b.push(g.sum_axis(Axis(0)));
            g = g.dot(&layer.w);
        }
        grads.w.reverse();
        grads.b.reverse();
        Ok((grads, g))
    }

    /// `self <- (1 - tau) self + tau other`, parameter by parameter.
    pub fn soft_update_from(&mut self, other: &Network, tau: f64) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            a.w.zip_mut_with(&b.w, |x, &y| *x = (1.0 - tau) * *x + tau * y);
            a.b.zip_mut_with(&b.b, |x, &y| *x = (1.0 - tau) * *x + tau * y);
        }
    }

    /// Largest absolute parameter difference to a same-shaped network.
    pub fn max_abs_diff(&self, other: &Network) -> f64 {
        self.layers
            .iter()
            .zip(&other.layers)
            .flat_map(|(a, b)| {
                a.w.iter()
                    .zip(b.w.iter())
                    .chain(a.b.iter().zip(b.b.iter()))
                    .map(|(x, y)| (x - y).abs())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    /// Visit every scalar parameter mutably, weights before biases, layer
    /// by layer.
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(l.b.iter()))
    }
}

/// Split the columns of a batch into two views at `at`.
pub fn split_cols(x: &Array2<f64>, at: usize) -> (ArrayView2<'_, f64>, ArrayView2<'_, f64>) {
    (x.slice(s![.., ..at]), x.slice(s![.., at..]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_layer_passes_input_through() {
        let net = Network {
            layers: vec![Layer {
                w: Array2::eye(3),
                b: Array1::zeros(3),
                act: Activation::Identity,
            }],
        };
        assert_eq!(
            net.forward_one(&[1.0, -2.0, 3.0]).unwrap(),
            vec![1.0, -2.0, 3.0]
        );
    }

    #[test]
    fn relu_zeroes_negative_preactivations() {
        let net = Network {
            layers: vec![Layer {
                w: Array2::eye(2),
                b: array![-5.0, -5.0],
                act: Activation::Relu,
            }],
        };
        assert_eq!(net.forward_one(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn init_is_seeded_bounded_and_bias_free() {
        let a = Network::new(&[8, 32, 32, 6], 5).unwrap();
        assert_eq!(a, Network::new(&[8, 32, 32, 6], 5).unwrap());
        assert_ne!(a, Network::new(&[8, 32, 32, 6], 6).unwrap());
        assert_eq!(a.forward_one(&[0.0; 8]).unwrap(), vec![0.0; 6]);
        for l in &a.layers {
            let bound = 1.0 / (l.w.ncols() as f64).sqrt();
            assert!(l.w.iter().all(|v| v.abs() <= bound));
        }
        assert!(Network::new(&[8, 0, 6], 0).is_err());
        assert!(Network::new(&[8, 6], 0).is_err());
    }

    #[test]
    fn linear_weight_gradient_is_an_outer_product() {
        let net = Network {
            layers: vec![Layer {
                w: array![[0.3, -0.2], [0.1, 0.4], [0.5, 0.5]],
                b: Array1::zeros(3),
                act: Activation::Identity,
            }],
        };
        let x = array![[2.0, -1.0]];
        let g = array![[1.0, 0.5, -2.0]];
        let (_, cache) = net.forward(x.view()).unwrap();
        let (grads, dx) = net.backward(&cache, g.view()).unwrap();
        assert_eq!(grads.w[0], g.t().dot(&x));
        assert_eq!(dx, g.dot(&net.layers[0].w));
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_gradients() {
        let net = Network::new(&[4, 5, 2], 1).unwrap();
        let x = Array2::from_elem((3, 4), 0.7);
        let (_, cache) = net.forward(x.view()).unwrap();
        let (grads, dx) = net.backward(&cache, Array2::zeros((3, 2)).view()).unwrap();
        assert!(grads.w.iter().all(|w| w.iter().all(|&v| v == 0.0)));
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let net = Network::new(&[4, 5, 2], 1).unwrap();
        assert!(matches!(
            net.forward(Array2::zeros((1, 3)).view()),
            Err(Error::Dimension {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn soft_update_extremes() {
        let a = Network::new(&[3, 4, 1], 1).unwrap();
        let b = Network::new(&[3, 4, 1], 2).unwrap();
        let mut t = a.clone();
        t.soft_update_from(&b, 0.0);
        assert_eq!(t, a);
        t.soft_update_from(&b, 1.0);
        assert_eq!(t, b);
    }
}
