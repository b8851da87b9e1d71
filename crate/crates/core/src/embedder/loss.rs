use super::Embedder;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::similarity::euclidean;
use crate::types::TripletSet;

/// Hinge triplet loss summed over `triplets`, with distances from `dist`.
pub fn triplet_loss_with(
    dist: impl Fn(usize, usize) -> f64,
    triplets: &TripletSet,
    alpha: f64,
) -> f64 {
    triplets
        .triplets
        .iter()
        .map(|t| (dist(t.anchor, t.positive) - dist(t.anchor, t.negative) + alpha).max(0.0))
        .sum()
}

/// Hinge triplet loss on raw Euclidean distances between embedding rows.
pub fn triplet_loss(embeddings: &Matrix, triplets: &TripletSet, alpha: f64) -> f64 {
    triplet_loss_with(
        |i, j| euclidean(embeddings.row(i), embeddings.row(j)),
        triplets,
        alpha,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Gradient of the loss with respect to every parameter of an [`Embedder`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradientBundle {
    pub layers: Vec<LayerGrad>,
    pub loss: f64,
    /// Triplets with a strictly positive hinge term.
    pub active_triplets: usize,
}

impl GradientBundle {
    /// Buffers in the same order as [`Embedder::param_slices_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Loss and its gradient with respect to the embedding rows.
///
/// The hinge is inactive when its argument is exactly zero. A zero distance
/// contributes a zero gradient.
pub fn embedding_gradient(
    embeddings: &Matrix,
    triplets: &TripletSet,
    alpha: f64,
) -> (f64, Matrix, usize) {
    let mut grad = Matrix::zeros(embeddings.rows(), embeddings.cols());
    let mut loss = 0.0;
    let mut active = 0;
    let d = embeddings.cols();
    let mut unit_p = vec![0.0; d];
    let mut unit_n = vec![0.0; d];
    for t in &triplets.triplets {
        let (ea, ep, en) = (
            embeddings.row(t.anchor),
            embeddings.row(t.positive),
            embeddings.row(t.negative),
        );
        let dap = euclidean(ea, ep);
        let dan = euclidean(ea, en);
        let margin = dap - dan + alpha;
        if margin <= 0.0 {
            continue;
        }
        loss += margin;
        active += 1;
        for k in 0..d {
            unit_p[k] = if dap > 0.0 {
                (ea[k] - ep[k]) / dap
            } else {
                0.0
            };
            unit_n[k] = if dan > 0.0 {
                (ea[k] - en[k]) / dan
            } else {
                0.0
            };
        }
        for k in 0..d {
            grad.row_mut(t.anchor)[k] += unit_p[k] - unit_n[k];
            grad.row_mut(t.positive)[k] -= unit_p[k];
            grad.row_mut(t.negative)[k] += unit_n[k];
        }
    }
    (loss, grad, active)
}

/// Exact gradient of the triplet loss through the network.
pub fn backward(
    net: &Embedder,
    features: &Matrix,
    triplets: &TripletSet,
    alpha: f64,
) -> Result<GradientBundle> {
    if let Some(max) = triplets.max_index() {
        if max >= features.rows() {
            return Err(Error::Dimension {
                expected: features.rows(),
                actual: max + 1,
                context: "triplet index vs batch rows",
            });
        }
    }
    let cache = net.forward_cached(features)?;
    let (loss, grad_out, active) = embedding_gradient(&cache.output, triplets, alpha);

    let n_layers = net.layers().len();
    let mut grads: Vec<LayerGrad> = net
        .layers()
        .iter()
        .map(|l| LayerGrad {
            weights: vec![0.0; l.weights.len()],
            bias: vec![0.0; l.bias.len()],
        })
        .collect();

    // gradient w.r.t. the last layer's output
    let mut upstream = grad_out;
    if let Some(norms) = &cache.norms {
        for (r, &n) in norms.iter().enumerate() {
            let e = cache.output.row(r);
            let g = upstream.row_mut(r);
            if n > 0.0 {
                let dot: f64 = e.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
                for (gk, ek) in g.iter_mut().zip(e) {
                    *gk = (*gk - ek * dot) / n;
                }
            } else {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
        }
    }

    for l in (0..n_layers).rev() {
        let layer = &net.layers()[l];
        let input = &cache.activations[l];
        let pre = &cache.pre[l];
        // through the nonlinearity of hidden layers; relu'(0) = 0
        if l + 1 < n_layers {
            for (g, &z) in upstream.as_mut_slice().iter_mut().zip(pre.as_slice()) {
                if z <= 0.0 {
                    *g = 0.0;
                }
            }
        }
        let lg = &mut grads[l];
        for r in 0..input.rows() {
            let gz = upstream.row(r);
            let x = input.row(r);
            for (o, &g) in gz.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                lg.bias[o] += g;
                let w = &mut lg.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (wi, &xi) in w.iter_mut().zip(x) {
                    *wi += g * xi;
                }
            }
        }
        if l > 0 {
            let mut down = Matrix::zeros(input.rows(), layer.inputs);
            for r in 0..input.rows() {
                let gz = upstream.row(r);
                let dr = down.row_mut(r);
                for (o, &g) in gz.iter().enumerate() {
                    if g == 0.0 {
                        continue;
                    }
                    let w = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (di, &wi) in dr.iter_mut().zip(w) {
                        *di += g * wi;
                    }
                }
            }
            upstream = down;
        }
    }

    Ok(GradientBundle {
        layers: grads,
        loss,
        active_triplets: active,
    })
}
