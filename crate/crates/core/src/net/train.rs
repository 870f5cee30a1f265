//! Mini-batch ADAM training loop.
//!
//! The training set is reshuffled every epoch with the spec's seeded stream
//! and cut into mini-batches; a short final batch is used as-is. Every batch
//! is evaluated once per distinct measurement outcome (the input alphabet is
//! the outcome set), which is exactly the per-sample gradient sum refactored.
//! Training is deterministic: fixed seeds give bit-identical final weights at
//! any thread count.

use super::{DenseNetwork, NetworkGradients, Workspace, LOG_CLIP};
use crate::dataset::TrainingSet;
use crate::error::{Error, Result};
use crate::par;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// ADAM hyperparameters; defaults are the reference settings
/// (0.001, 0.9, 0.999, 1e-8).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams { step_size: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Everything that defines a training run besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamParams,
    /// Seeds the per-epoch batch order (weight initialization has its own
    /// seed in [`init`](crate::net::init)).
    pub seed: u64,
}

impl TrainSpec {
    pub fn new(epochs: usize, batch_size: usize, seed: u64) -> Self {
        TrainSpec { epochs, batch_size, adam: AdamParams::default(), seed }
    }
}

/// Trained network plus the mean cross-entropy per epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: DenseNetwork,
    pub epoch_loss: Vec<f64>,
}

struct AdamState {
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    fn new(n_params: usize) -> Self {
        AdamState { t: 0, m: vec![0.0; n_params], v: vec![0.0; n_params] }
    }
}

/// Elementwise ADAM update over one parameter slice, split for large layers.
fn adam_update(
    w: &mut [f64],
    m: &mut [f64],
    v: &mut [f64],
    g: &[f64],
    p: &AdamParams,
    corr1: f64,
    corr2: f64,
) {
    const PAR_LEN: usize = 1 << 16;
    if w.len() >= PAR_LEN && par::thread_count() > 1 {
        let mid = w.len() / 2;
        let (w1, w2) = w.split_at_mut(mid);
        let (m1, m2) = m.split_at_mut(mid);
        let (v1, v2) = v.split_at_mut(mid);
        let (g1, g2) = g.split_at(mid);
        par::join(
            || adam_update(w1, m1, v1, g1, p, corr1, corr2),
            || adam_update(w2, m2, v2, g2, p, corr1, corr2),
        );
        return;
    }
    for i in 0..w.len() {
        let grad = g[i];
        m[i] = p.beta1 * m[i] + (1.0 - p.beta1) * grad;
        v[i] = p.beta2 * v[i] + (1.0 - p.beta2) * grad * grad;
        let m_hat = m[i] / corr1;
        let v_hat = v[i] / corr2;
        w[i] -= p.step_size * m_hat / (v_hat.sqrt() + p.epsilon);
    }
}

/// Runs ADAM over the training set and returns the trained network with its
/// per-epoch mean loss.
pub fn train(net: DenseNetwork, ts: &TrainingSet, spec: &TrainSpec) -> Result<TrainOutcome> {
    if spec.epochs == 0 {
        return Err(Error::invalid("training requires at least one epoch"));
    }
    if spec.batch_size == 0 {
        return Err(Error::invalid("mini-batch size must be at least 1"));
    }
    if ts.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if ts.grid().len() != net.config().output_dim {
        return Err(Error::GridMismatch(format!(
            "network has {} outputs but the training grid has {} points",
            net.config().output_dim,
            ts.grid().len()
        )));
    }

    let mut net = net;
    let n_mu = ts.outcomes().len();
    let inputs: Vec<f64> = ts.outcomes().values().to_vec();
    let records = ts.records();
    let m_total = records.len();

    let mut ws = Workspace::new(&net, n_mu);
    let mut grads = NetworkGradients::zeros_like(&net);
    let mut adam: Vec<AdamState> = net
        .layers()
        .iter()
        .map(|l| AdamState::new(l.weights.data().len() + l.bias.len()))
        .collect();

    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut perm: Vec<u32> = (0..m_total as u32).collect();
    let mut multiplicity = vec![0.0f64; n_mu];
    let mut epoch_loss = Vec::with_capacity(spec.epochs);

    for _ in 0..spec.epochs {
        perm.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in perm.chunks(spec.batch_size) {
            let inv_b = 1.0 / batch.len() as f64;
            multiplicity.fill(0.0);
            for &ri in batch {
                multiplicity[records[ri as usize].0 as usize] += 1.0;
            }
            net.forward_rows(&inputs, &mut ws);
            {
                let Workspace { acts, deltas, .. } = &mut ws;
                let probs = acts.last().unwrap();
                for &ri in batch {
                    let (mu, label) = records[ri as usize];
                    loss_sum -= probs[(mu as usize, label as usize)].max(LOG_CLIP).ln();
                }
                let d_out = deltas.last_mut().unwrap();
                for i in 0..n_mu {
                    let p = probs.row(i);
                    let row = d_out.row_mut(i);
                    let w = multiplicity[i] * inv_b;
                    for (slot, &pi) in row.iter_mut().zip(p) {
                        *slot = w * pi;
                    }
                }
                for &ri in batch {
                    let (mu, label) = records[ri as usize];
                    d_out[(mu as usize, label as usize)] -= inv_b;
                }
            }
            net.backward_rows(&mut ws, &mut grads);

            // ADAM step with global step count for bias correction.
            let step = adam[0].t + 1;
            let corr1 = 1.0 - spec.adam.beta1.powi(step as i32);
            let corr2 = 1.0 - spec.adam.beta2.powi(step as i32);
            for (layer, (g, state)) in net
                .layers_mut()
                .iter_mut()
                .zip(grads.layers.iter().zip(adam.iter_mut()))
            {
                state.t = step;
                let wn = layer.weights.data().len();
                let (mw, mb) = state.m.split_at_mut(wn);
                let (vw, vb) = state.v.split_at_mut(wn);
                adam_update(
                    layer.weights.data_mut(),
                    mw,
                    vw,
                    g.weights.data(),
                    &spec.adam,
                    corr1,
                    corr2,
                );
                adam_update(&mut layer.bias, mb, vb, &g.bias, &spec.adam, corr1, corr2);
            }
        }
        epoch_loss.push(loss_sum / m_total as f64);
    }

    Ok(TrainOutcome { network: net, epoch_loss })
}
