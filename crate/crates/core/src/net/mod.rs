//! Dense feed-forward softmax classifier, written from scratch.
//!
//! One real-valued input (a measurement result), ReLU hidden layers, and a
//! softmax output over the d grid labels, so a forward pass is a discretized
//! probability distribution by construction. The input takes only as many
//! distinct values as there are measurement outcomes, so batched passes are
//! evaluated once per distinct input and weighted by multiplicity; gradients
//! are mathematically identical to the per-sample sum.

mod checkpoint;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
pub use train::{train, AdamParams, TrainOutcome, TrainSpec};

use crate::error::{Error, Result};
use crate::linalg::{matmul_nn_into, matmul_nt_into, transpose_into, Mat};
use crate::par;
use crate::spin::OutcomeSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Cross-entropy clip: -ln(max(a, LOG_CLIP)) keeps cold outputs finite.
pub const LOG_CLIP: f64 = 1e-12;

/// Architecture plus the affine input map applied before the first layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Hidden layer widths; may be empty for a softmax-only classifier.
    pub hidden: Vec<usize>,
    /// Output dimension d, the size of the paired parameter grid.
    pub output_dim: usize,
    /// Input scaling (a, b): the network sees a*mu + b.
    pub input_scale: (f64, f64),
}

impl NetworkConfig {
    pub fn new(hidden: Vec<usize>, output_dim: usize, input_scale: (f64, f64)) -> Result<Self> {
        if hidden.iter().any(|&w| w == 0) {
            return Err(Error::invalid("hidden layer widths must be at least 1"));
        }
        if output_dim < 2 {
            return Err(Error::invalid("output dimension must be at least 2"));
        }
        if !input_scale.0.is_finite() || !input_scale.1.is_finite() || input_scale.0 == 0.0 {
            return Err(Error::invalid("input scale must be finite with nonzero slope"));
        }
        Ok(NetworkConfig { hidden, output_dim, input_scale })
    }

    /// Scales the outcome range onto [-1, 1]; raw J_z values grow with N and
    /// destabilize training for large systems.
    pub fn for_outcomes(hidden: Vec<usize>, output_dim: usize, outcomes: &OutcomeSet) -> Result<Self> {
        let lo = outcomes.value(0);
        let hi = outcomes.value(outcomes.len() - 1);
        let a = 2.0 / (hi - lo);
        let b = -(hi + lo) / (hi - lo);
        Self::new(hidden, output_dim, (a, b))
    }

    /// Layer dimensions as (input, output) pairs, starting from the scalar input.
    fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 1);
        let mut prev = 1;
        for &w in &self.hidden {
            dims.push((prev, w));
            prev = w;
        }
        dims.push((prev, self.output_dim));
        dims
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layer {
    /// Row-major (out x in).
    pub(crate) weights: Mat,
    pub(crate) bias: Vec<f64>,
}

/// The classifier. A trained network is immutable and may be evaluated
/// concurrently; training itself is single-threaded over update steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    config: NetworkConfig,
    layers: Vec<Layer>,
}

/// Initializes weights uniformly on +-sqrt(6 / (fan_in + fan_out)) and biases
/// at zero, drawn in layer order (weights row-major, then bias) from a
/// ChaCha12 stream; the same seed always yields the same network.
pub fn init(config: NetworkConfig, seed: u64) -> DenseNetwork {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let layers = config
        .layer_dims()
        .iter()
        .map(|&(fan_in, fan_out)| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let weights = Mat::from_fn(fan_out, fan_in, |_, _| {
                (rng.random::<f64>() * 2.0 - 1.0) * bound
            });
            Layer { weights, bias: vec![0.0; fan_out] }
        })
        .collect();
    DenseNetwork { config, layers }
}

impl DenseNetwork {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn output_dim(&self) -> usize {
        self.config.output_dim
    }

    pub(crate) fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Total number of weights and biases.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.bias.len())
            .sum()
    }

    /// Flattens all parameters, layer by layer (weights row-major, then bias).
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(layer.weights.data());
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    /// Inverse of [`params_flat`](Self::params_flat).
    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::invalid(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let mut pos = 0;
        for layer in &mut self.layers {
            let wn = layer.weights.data().len();
            layer.weights.data_mut().copy_from_slice(&params[pos..pos + wn]);
            pos += wn;
            let bn = layer.bias.len();
            layer.bias.copy_from_slice(&params[pos..pos + bn]);
            pos += bn;
        }
        Ok(())
    }

    /// Single-input forward pass; the output is a probability vector over the
    /// grid labels (softmax normalized).
    pub fn forward(&self, mu: f64) -> Result<Vec<f64>> {
        if !mu.is_finite() {
            return Err(Error::invalid(format!("network input must be finite, got {mu}")));
        }
        let mut ws = Workspace::new(self, 1);
        self.forward_rows(&[mu], &mut ws);
        Ok(ws.acts.last().unwrap().row(0).to_vec())
    }

    /// Forward pass over a batch of distinct raw inputs; fills `ws.acts` and
    /// leaves softmax probabilities in the last activation matrix.
    pub(crate) fn forward_rows(&self, inputs: &[f64], ws: &mut Workspace) {
        let n = inputs.len();
        let (a, b) = self.config.input_scale;
        debug_assert_eq!(ws.acts[0].rows(), n);
        for (i, &mu) in inputs.iter().enumerate() {
            ws.acts[0][(i, 0)] = a * mu + b;
        }
        let n_layers = self.layers.len();
        for (l, layer) in self.layers.iter().enumerate() {
            let (lo, hi) = ws.acts.split_at_mut(l + 1);
            let input = &lo[l];
            let out = &mut hi[0];
            matmul_nt_into(out, input, &layer.weights);
            let last = l + 1 == n_layers;
            for r in 0..n {
                let row = out.row_mut(r);
                for (x, &bias) in row.iter_mut().zip(&layer.bias) {
                    *x += bias;
                }
                if !last {
                    for x in row.iter_mut() {
                        if *x < 0.0 {
                            *x = 0.0;
                        }
                    }
                }
            }
        }
        softmax_rows(ws.acts.last_mut().unwrap());
    }

    /// Backward pass. `ws.deltas.last()` must hold the output-layer delta
    /// (dLoss/dlogits); gradients land in `grads`.
    pub(crate) fn backward_rows(&self, ws: &mut Workspace, grads: &mut NetworkGradients) {
        let n_layers = self.layers.len();
        for l in (0..n_layers).rev() {
            // dW = delta^T * input activations, as an nn-product so the inner
            // length is the layer width rather than the small batch alphabet.
            transpose_into(&mut ws.delta_t[l], &ws.deltas[l]);
            matmul_nn_into(&mut grads.layers[l].weights, &ws.delta_t[l], &ws.acts[l]);
            let delta = &ws.deltas[l];
            for (j, slot) in grads.layers[l].bias.iter_mut().enumerate() {
                let mut acc = 0.0;
                for i in 0..delta.rows() {
                    acc += delta[(i, j)];
                }
                *slot = acc;
            }
            if l > 0 {
                let (lo, hi) = ws.deltas.split_at_mut(l);
                matmul_nn_into(&mut lo[l - 1], &hi[0], &self.layers[l].weights);
                // ReLU mask: the stored activation is the rectifier output.
                let act = &ws.acts[l];
                let prev = &mut lo[l - 1];
                for i in 0..prev.rows() {
                    let row = prev.row_mut(i);
                    let arow = act.row(i);
                    for (x, &a) in row.iter_mut().zip(arow) {
                        if a <= 0.0 {
                            *x = 0.0;
                        }
                    }
                }
            }
        }
    }
}

fn softmax_rows(logits: &mut Mat) {
    let rows = logits.rows();
    let cols = logits.cols();
    let chunk = if rows * cols >= 1 << 15 && par::thread_count() > 1 {
        rows.div_ceil(par::thread_count()).max(1)
    } else {
        rows
    };
    par::for_each_chunk_mut(logits.data_mut(), chunk * cols, |_, data| {
        for row in data.chunks_mut(cols) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for x in row.iter_mut() {
                *x = (*x - max).exp();
                sum += *x;
            }
            let inv = 1.0 / sum;
            for x in row.iter_mut() {
                *x *= inv;
            }
        }
    });
}

/// Per-layer gradients in the same shapes as the network parameters.
#[derive(Debug, Clone)]
pub struct LayerGradients {
    pub weights: Mat,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NetworkGradients {
    pub layers: Vec<LayerGradients>,
}

impl NetworkGradients {
    pub(crate) fn zeros_like(net: &DenseNetwork) -> Self {
        let layers = net
            .layers
            .iter()
            .map(|l| LayerGradients {
                weights: Mat::zeros(l.weights.rows(), l.weights.cols()),
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        NetworkGradients { layers }
    }

    /// Flat layout matching [`DenseNetwork::params_flat`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend_from_slice(layer.weights.data());
            out.extend_from_slice(&layer.bias);
        }
        out
    }
}

/// Scratch buffers for batched passes over `n` distinct inputs.
pub(crate) struct Workspace {
    /// acts[0] is the n x 1 scaled input; acts[l+1] the output of layer l.
    pub(crate) acts: Vec<Mat>,
    pub(crate) deltas: Vec<Mat>,
    delta_t: Vec<Mat>,
}

impl Workspace {
    pub(crate) fn new(net: &DenseNetwork, n: usize) -> Self {
        let dims = net.config.layer_dims();
        let mut acts = vec![Mat::zeros(n, 1)];
        for &(_, out) in &dims {
            acts.push(Mat::zeros(n, out));
        }
        let deltas: Vec<Mat> = dims.iter().map(|&(_, out)| Mat::zeros(n, out)).collect();
        let delta_t: Vec<Mat> = dims.iter().map(|&(_, out)| Mat::zeros(out, n)).collect();
        Workspace { acts, deltas, delta_t }
    }

    pub(crate) fn probabilities(&self) -> &Mat {
        self.acts.last().unwrap()
    }
}

/// Groups a batch of (input value, label) samples by distinct input.
fn group_batch(net: &DenseNetwork, batch: &[(f64, usize)]) -> (Vec<f64>, Vec<(usize, usize)>) {
    assert!(!batch.is_empty(), "batch must be nonempty");
    let mut values: Vec<f64> = batch.iter().map(|&(mu, _)| mu).collect();
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| a.total_cmp(b).is_eq());
    let events = batch
        .iter()
        .map(|&(mu, label)| {
            assert!(mu.is_finite(), "network input must be finite");
            assert!(
                label < net.config.output_dim,
                "label {label} outside output dimension {}",
                net.config.output_dim
            );
            let row = values
                .binary_search_by(|v| v.total_cmp(&mu))
                .expect("value present by construction");
            (row, label)
        })
        .collect();
    (values, events)
}

/// Mean categorical cross-entropy of the batch, -<ln a_label>, with the
/// ln argument clipped at 1e-12.
pub fn loss(net: &DenseNetwork, batch: &[(f64, usize)]) -> f64 {
    let (values, events) = group_batch(net, batch);
    let mut ws = Workspace::new(net, values.len());
    net.forward_rows(&values, &mut ws);
    let probs = ws.probabilities();
    let sum: f64 = events
        .iter()
        .map(|&(row, label)| -(probs[(row, label)].max(LOG_CLIP)).ln())
        .sum();
    sum / batch.len() as f64
}

/// Exact analytic gradient of [`loss`] with respect to every weight and bias.
pub fn gradient(net: &DenseNetwork, batch: &[(f64, usize)]) -> NetworkGradients {
    let (values, events) = group_batch(net, batch);
    let mut ws = Workspace::new(net, values.len());
    net.forward_rows(&values, &mut ws);
    let mut grads = NetworkGradients::zeros_like(net);
    let inv_b = 1.0 / batch.len() as f64;
    // Softmax plus cross-entropy: dLoss/dlogits = (multiplicity * a - counts) / B.
    let mut multiplicity = vec![0.0; values.len()];
    for &(row, _) in &events {
        multiplicity[row] += 1.0;
    }
    {
        let Workspace { acts, deltas, .. } = &mut ws;
        let probs = acts.last().unwrap();
        let d_out = deltas.last_mut().unwrap();
        for i in 0..values.len() {
            let p = probs.row(i);
            let row = d_out.row_mut(i);
            for (slot, &pi) in row.iter_mut().zip(p) {
                *slot = multiplicity[i] * pi * inv_b;
            }
        }
        for &(row, label) in &events {
            d_out[(row, label)] -= inv_b;
        }
    }
    net.backward_rows(&mut ws, &mut grads);
    grads
}
