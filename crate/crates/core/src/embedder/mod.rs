//! Small fully connected embedding network with hand-derived gradients.
//!
//! Hidden layers use ReLU, the output layer is linear. With
//! `normalize_output` the output rows are additionally scaled to unit
//! Euclidean norm.

mod checkpoint;
mod gradcheck;
mod loss;

use rand::Rng;

pub use checkpoint::{CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{finite_difference_check, GradCheckReport, GRADIENT_FLOOR};
pub use loss::{
    backward, embedding_gradient, triplet_loss, triplet_loss_with, GradientBundle, LayerGrad,
};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Dense layer `y = W x + b`, with `W` stored row-major as `outputs x inputs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.inputs + inp]
    }

    /// Applies the affine map to every row of `x`.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.rows(), self.outputs);
        for r in 0..x.rows() {
            let xr = x.row(r);
            let yr = out.row_mut(r);
            for (o, y) in yr.iter_mut().enumerate() {
                let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                *y = self.bias[o] + w.iter().zip(xr).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Embedder {
    layers: Vec<Layer>,
    normalize_output: bool,
}

/// Intermediate values of one forward pass, kept for backpropagation.
pub(crate) struct ForwardCache {
    /// `activations[0]` is the input; `activations[l + 1]` the output of layer `l`
    /// after its nonlinearity (none on the last layer).
    pub activations: Vec<Matrix>,
    /// Pre-activation of every layer.
    pub pre: Vec<Matrix>,
    /// Row norms of the last layer's output, when normalizing.
    pub norms: Option<Vec<f64>>,
    pub output: Matrix,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::config(format!(
            "layer dims {dims:?} need at least an input and an output size, all positive"
        )));
    }
    Ok(())
}

impl Embedder {
    /// All weights and biases zero.
    pub fn zeros(dims: &[usize], normalize_output: bool) -> Result<Self> {
        check_dims(dims)?;
        let layers = dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Ok(Embedder {
            layers,
            normalize_output,
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(
        dims: &[usize],
        normalize_output: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Embedder::zeros(dims, normalize_output)?;
        for layer in &mut net.layers {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..=limit);
            }
        }
        Ok(net)
    }

    pub fn from_layers(layers: Vec<Layer>, normalize_output: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::config("an embedder needs at least one layer"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::config(format!(
                    "layer {i} buffers do not match its shape"
                )));
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(Error::Dimension {
                    expected: layers[i - 1].outputs,
                    actual: l.inputs,
                    context: "consecutive layer sizes",
                });
            }
        }
        Ok(Embedder {
            layers,
            normalize_output,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn normalize_output(&self) -> bool {
        self.normalize_output
    }

    /// `[F, h1, ..., d]`.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs)
            .chain(self.layers.iter().map(|l| l.outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").outputs
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|v| v.is_finite()))
    }

    /// Parameter buffers in a fixed order: layer 0 weights, layer 0 bias, layer 1 weights, ...
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }

    pub fn forward(&self, features: &Matrix) -> Result<Matrix> {
        Ok(self.forward_cached(features)?.output)
    }

    pub(crate) fn forward_cached(&self, features: &Matrix) -> Result<ForwardCache> {
        if features.cols() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                actual: features.cols(),
                context: "feature dimension",
            });
        }
        let last = self.layers.len() - 1;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        activations.push(features.clone());
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.apply(activations.last().expect("input pushed"));
            let mut a = z.clone();
            if i < last {
                for v in a.as_mut_slice() {
                    *v = v.max(0.0);
                }
            }
            pre.push(z);
            activations.push(a);
        }
        let mut output = activations.last().expect("nonempty").clone();
        let norms = self.normalize_output.then(|| {
            (0..output.rows())
                .map(|r| {
                    let row = output.row_mut(r);
                    let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if n > 0.0 {
                        row.iter_mut().for_each(|v| *v /= n);
                    }
                    n
                })
                .collect()
        });
        Ok(ForwardCache {
            activations,
            pre,
            norms,
            output,
        })
    }
}
