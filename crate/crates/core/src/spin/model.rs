//! Outcome-probability models: P(mu|theta) for a probe state under a J_y
//! phase rotation and (optionally) a Gaussian detection-resolution blur.

use super::rotation::SpinRotor;
use super::{DetectionNoise, ModelDescriptor, OutcomeSet, StateKind, StateRepr, SymmetricState};
use crate::error::Result;
use crate::linalg::Mat;
use crate::par;
use num_complex::Complex64;

/// Central-difference step used by fisher defaults; small enough that the
/// O(h^2) truncation error sits below every stated tolerance, large enough to
/// stay clear of rounding noise.
pub const DEFAULT_FISHER_STEP: f64 = 1e-4;

/// Applies the detection-resolution convolution
/// `P(mu|theta, dmu) = sum_mu' C_mu' exp[-(mu-mu')^2 / (2 dmu^2)] P(mu'|theta)`
/// where C_mu' normalizes each source column. `sigma_sq = 0` is the identity.
pub fn apply_detection_noise(probs: &[f64], outcomes: &OutcomeSet, sigma_sq: f64) -> Vec<f64> {
    assert_eq!(probs.len(), outcomes.len());
    if sigma_sq == 0.0 {
        return probs.to_vec();
    }
    let kernel = noise_kernel(outcomes, sigma_sq);
    convolve(&kernel, probs)
}

/// Column-normalized Gaussian response matrix: entry (i, j) is the probability
/// of reporting outcome i when the true outcome is j.
fn noise_kernel(outcomes: &OutcomeSet, sigma_sq: f64) -> Mat {
    let n = outcomes.len();
    let values = outcomes.values();
    let mut kernel = Mat::from_fn(n, n, |i, j| {
        let d = values[i] - values[j];
        (-d * d / (2.0 * sigma_sq)).exp()
    });
    for j in 0..n {
        let col_sum: f64 = (0..n).map(|i| kernel[(i, j)]).sum();
        for i in 0..n {
            kernel[(i, j)] /= col_sum;
        }
    }
    kernel
}

fn convolve(kernel: &Mat, probs: &[f64]) -> Vec<f64> {
    let n = probs.len();
    let mut out = vec![0.0; n];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = crate::linalg::dot(kernel.row(i), probs);
    }
    out
}

/// A probe state plus measurement: everything needed to evaluate P(mu|theta).
///
/// Values are immutable after construction and safe to share across
/// concurrent evaluation workers.
#[derive(Debug, Clone)]
pub struct LikelihoodModel {
    state: SymmetricState,
    kind: Option<StateKind>,
    outcomes: OutcomeSet,
    noise: Option<DetectionNoise>,
    rotor: SpinRotor,
    /// Eigenbasis projection of the pure state, None for mixed states.
    carrier: Option<Vec<Complex64>>,
    /// Real part of the density matrix (the imaginary part cannot contribute
    /// to diagonal elements of R rho R^T for real R).
    density_real: Option<Mat>,
    kernel: Option<Mat>,
}

impl LikelihoodModel {
    /// Builds the model for a built-in state kind.
    pub fn from_kind(
        kind: StateKind,
        n_qubits: usize,
        noise: Option<DetectionNoise>,
    ) -> Result<Self> {
        let state = super::make_state(kind, n_qubits)?;
        let mut model = Self::from_state(state, noise);
        model.kind = Some(kind);
        Ok(model)
    }

    /// Builds the model for an arbitrary symmetric state.
    pub fn from_state(state: SymmetricState, noise: Option<DetectionNoise>) -> Self {
        let n = state.n_qubits();
        let outcomes = OutcomeSet::for_qubits(n);
        let rotor = SpinRotor::new(n);
        let (carrier, density_real) = match state.repr() {
            StateRepr::Pure(amps) => (Some(rotor.carrier(amps)), None),
            StateRepr::Mixed(rho) => {
                let d = n + 1;
                let re = Mat::from_fn(d, d, |r, c| rho[(r, c)].re);
                (None, Some(re))
            }
        };
        let kernel = noise
            .filter(|dn| dn.sigma_sq > 0.0)
            .map(|dn| noise_kernel(&outcomes, dn.sigma_sq));
        LikelihoodModel { state, kind: None, outcomes, noise, rotor, carrier, density_real, kernel }
    }

    /// The single-qubit model of the worked example: P(up|theta) = cos^2(theta/2).
    pub fn qubit() -> Self {
        Self::from_kind(StateKind::Qubit, 1, None).expect("qubit model is always valid")
    }

    pub fn from_descriptor(desc: &ModelDescriptor) -> Result<Self> {
        let noise = match desc.noise_sigma_sq {
            Some(s) => Some(DetectionNoise::new(s)?),
            None => None,
        };
        Self::from_kind(desc.state_kind()?, desc.n, noise)
    }

    pub fn descriptor(&self) -> Option<ModelDescriptor> {
        self.kind
            .map(|k| ModelDescriptor::new(k, self.state.n_qubits(), self.noise))
    }

    pub fn n_qubits(&self) -> usize {
        self.state.n_qubits()
    }

    pub fn outcomes(&self) -> &OutcomeSet {
        &self.outcomes
    }

    pub fn noise(&self) -> Option<DetectionNoise> {
        self.noise
    }

    pub fn state(&self) -> &SymmetricState {
        &self.state
    }

    /// P(mu|theta) over the outcome set; normalized, entries >= 0.
    pub fn likelihood(&self, theta: f64) -> Vec<f64> {
        let mut probs = match (&self.carrier, &self.density_real) {
            (Some(w), _) => {
                let amps = self.rotor.rotate_carrier(w, theta);
                amps.iter().map(|c| c.norm_sqr()).collect::<Vec<f64>>()
            }
            (None, Some(re_rho)) => {
                let r = self.rotor.rotation(theta);
                let d = r.rows();
                let mut scratch = vec![0.0; d];
                let mut probs = vec![0.0; d];
                for (a, slot) in probs.iter_mut().enumerate() {
                    let row = r.row(a);
                    for (b, s) in scratch.iter_mut().enumerate() {
                        *s = crate::linalg::dot(re_rho.row(b), row);
                    }
                    *slot = crate::linalg::dot(row, &scratch);
                }
                probs
            }
            _ => unreachable!("model always has a carrier or a density matrix"),
        };
        // Rounding can leave diagonal elements a hair below zero.
        for p in &mut probs {
            if *p < 0.0 {
                debug_assert!(*p > -1e-12);
                *p = 0.0;
            }
        }
        if let Some(kernel) = &self.kernel {
            probs = convolve(kernel, &probs);
        }
        probs
    }

    /// Likelihood table over a list of angles, one column per angle.
    pub fn likelihood_table(&self, thetas: &[f64]) -> Mat {
        let cols = par::map_indexed(thetas.len(), |k| self.likelihood(thetas[k]));
        let n_mu = self.outcomes.len();
        let mut table = Mat::zeros(n_mu, thetas.len());
        for (k, col) in cols.iter().enumerate() {
            for (i, &p) in col.iter().enumerate() {
                table[(i, k)] = p;
            }
        }
        table
    }
}

/// Fisher information estimate with a count of regularized terms.
#[derive(Debug, Clone, Copy)]
pub struct FisherEstimate {
    pub value: f64,
    /// Grid outcomes where P ~ 0 but dP/dtheta did not vanish; these terms
    /// enter through the regularized ratio (dP)^2 / max(P, 1e-14).
    pub divergent_terms: usize,
}

/// F(theta) = sum_mu (dP/dtheta)^2 / P with a central difference of step `h`.
///
/// Terms with P < 1e-14 and |dP/dtheta| < 1e-10 contribute zero; a vanishing
/// probability with non-vanishing derivative is counted as a divergent term
/// and contributes through the floor max(P, 1e-14).
pub fn fisher_information(model: &LikelihoodModel, theta: f64, h: f64) -> FisherEstimate {
    assert!(h > 0.0, "finite-difference step must be positive");
    let plus = model.likelihood(theta + h);
    let minus = model.likelihood(theta - h);
    let center = model.likelihood(theta);
    let mut value = 0.0;
    let mut divergent = 0;
    for i in 0..center.len() {
        let dp = (plus[i] - minus[i]) / (2.0 * h);
        let p = center[i];
        if p < 1e-14 {
            if dp.abs() < 1e-10 {
                continue;
            }
            divergent += 1;
            value += dp * dp / 1e-14;
        } else {
            value += dp * dp / p;
        }
    }
    FisherEstimate { value, divergent_terms: divergent }
}
