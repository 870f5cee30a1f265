//! Exact probability models for collective-spin sensors.
//!
//! N qubits restricted to the permutation-symmetric subspace are described by
//! an (N+1)-dimensional state indexed by the J_z eigenvalue
//! mu in {-N/2, ..., N/2}. A phase shift theta enters through a rotation about
//! J_y, and the sensor reads out J_z, so the outcome distribution is
//! P(mu|theta) = diag of R(theta) rho R(theta)^T, optionally blurred by a
//! Gaussian detection-resolution kernel. These models generate all training
//! data and serve as the ground-truth oracle for the estimators.

mod model;
mod rotation;

pub use model::{
    apply_detection_noise, fisher_information, FisherEstimate, LikelihoodModel,
    DEFAULT_FISHER_STEP,
};
pub use rotation::{wigner_rotation, SpinRotor};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// The ordered set of measurement outcomes, stored as physical J_z values so
/// that detection-noise distances are meaningful. Index <-> value mapping is
/// exposed for serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSet {
    values: Vec<f64>,
}

impl OutcomeSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid("outcome set needs at least two outcomes"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("outcome values must be strictly increasing"));
        }
        Ok(OutcomeSet { values })
    }

    /// The N+1 eigenvalues of J_z for N qubits; for N=1 this is
    /// {-1/2, +1/2} = {down, up}.
    pub fn for_qubits(n_qubits: usize) -> Self {
        let half = n_qubits as f64 / 2.0;
        OutcomeSet {
            values: (0..=n_qubits).map(|k| k as f64 - half).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Index of an outcome value, matched within 1e-9 (values are exact
    /// half-integers for spin systems; the tolerance absorbs text round trips).
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.values.iter().position(|&v| (v - value).abs() < 1e-9)
    }
}

/// Gaussian readout blur with variance `sigma_sq` in outcome units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionNoise {
    pub sigma_sq: f64,
}

impl DetectionNoise {
    pub fn new(sigma_sq: f64) -> Result<Self> {
        if !sigma_sq.is_finite() || sigma_sq < 0.0 {
            return Err(Error::invalid(format!(
                "detection noise variance must be finite and >= 0, got {sigma_sq}"
            )));
        }
        Ok(DetectionNoise { sigma_sq })
    }
}

/// Built-in probe states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    /// Single qubit prepared spin-up, the pedagogical model with
    /// P(up|theta) = cos^2(theta/2).
    Qubit,
    /// Coherent spin state |down>^N.
    Css,
    /// Twin-Fock state: symmetrized N/2 up, N/2 down (even N only).
    Tfs,
    /// (1-epsilon) |TFS><TFS| + epsilon I/(N+1).
    DepolarizedTfs { epsilon: f64 },
    /// One-axis-twisted state: CSS polarized along +x (CSS rotated by pi/2
    /// about J_y), evolved by the diagonal phases exp(-i chi_t mu^2).
    Oat { chi_t: f64 },
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Qubit => "qubit",
            StateKind::Css => "css",
            StateKind::Tfs => "tfs",
            StateKind::DepolarizedTfs { .. } => "depolarized_tfs",
            StateKind::Oat { .. } => "oat",
        }
    }
}

/// Flat, serializable record of a model: `{kind, n, epsilon?, chi_t?,
/// noise_sigma_sq?}`. This is the wire format used in file headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma_sq: Option<f64>,
}

impl ModelDescriptor {
    pub fn new(kind: StateKind, n_qubits: usize, noise: Option<DetectionNoise>) -> Self {
        let (epsilon, chi_t) = match kind {
            StateKind::DepolarizedTfs { epsilon } => (Some(epsilon), None),
            StateKind::Oat { chi_t } => (None, Some(chi_t)),
            _ => (None, None),
        };
        ModelDescriptor {
            kind: kind.name().to_string(),
            n: n_qubits,
            epsilon,
            chi_t,
            noise_sigma_sq: noise.map(|d| d.sigma_sq),
        }
    }

    pub fn state_kind(&self) -> Result<StateKind> {
        match self.kind.as_str() {
            "qubit" => Ok(StateKind::Qubit),
            "css" => Ok(StateKind::Css),
            "tfs" => Ok(StateKind::Tfs),
            "depolarized_tfs" => {
                let epsilon = self.epsilon.ok_or_else(|| {
                    Error::invalid("depolarized_tfs descriptor requires `epsilon`")
                })?;
                Ok(StateKind::DepolarizedTfs { epsilon })
            }
            "oat" => {
                let chi_t = self
                    .chi_t
                    .ok_or_else(|| Error::invalid("oat descriptor requires `chi_t`"))?;
                Ok(StateKind::Oat { chi_t })
            }
            other => Err(Error::invalid(format!("unknown state kind `{other}`"))),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("descriptor serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("model descriptor: {e}")))
    }
}

/// State representation in the symmetric subspace.
#[derive(Debug, Clone)]
pub enum StateRepr {
    /// Amplitudes c_mu, indexed by ascending J_z eigenvalue.
    Pure(Vec<Complex64>),
    /// Density matrix in the same basis.
    Mixed(DMatrix<Complex64>),
}

/// A (pure or mixed) state of N qubits in the symmetric subspace.
#[derive(Debug, Clone)]
pub struct SymmetricState {
    n_qubits: usize,
    repr: StateRepr,
}

impl SymmetricState {
    pub fn new_pure(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("need at least one qubit"));
        }
        if amplitudes.len() != n_qubits + 1 {
            return Err(Error::invalid(format!(
                "pure state for N={} needs {} amplitudes, got {}",
                n_qubits,
                n_qubits + 1,
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "pure state must be normalized: sum |c|^2 = {norm}"
            )));
        }
        Ok(SymmetricState { n_qubits, repr: StateRepr::Pure(amplitudes) })
    }

    pub fn new_mixed(n_qubits: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("need at least one qubit"));
        }
        let dim = n_qubits + 1;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::invalid(format!(
                "density matrix for N={n_qubits} must be {dim}x{dim}"
            )));
        }
        let trace: Complex64 = (0..dim).map(|k| rho[(k, k)]).sum();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::invalid(format!("density matrix trace must be 1, got {trace}")));
        }
        for r in 0..dim {
            for c in 0..dim {
                let diff = rho[(r, c)] - rho[(c, r)].conj();
                if diff.norm() > 1e-12 {
                    return Err(Error::invalid("density matrix must be Hermitian"));
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(rho.clone());
        if eig.eigenvalues.iter().any(|&l| l < -1e-10) {
            return Err(Error::invalid("density matrix must be positive semidefinite"));
        }
        Ok(SymmetricState { n_qubits, repr: StateRepr::Mixed(rho) })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn repr(&self) -> &StateRepr {
        &self.repr
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, StateRepr::Pure(_))
    }
}

/// Outcome probabilities for the single-qubit model: (P(up|theta), P(down|theta)).
pub fn qubit_likelihood(theta: f64) -> (f64, f64) {
    let p_up = (theta / 2.0).cos().powi(2);
    (p_up, 1.0 - p_up)
}

/// Builds one of the built-in probe states.
pub fn make_state(kind: StateKind, n_qubits: usize) -> Result<SymmetricState> {
    if n_qubits == 0 {
        return Err(Error::invalid("need at least one qubit"));
    }
    let dim = n_qubits + 1;
    let one = Complex64::new(1.0, 0.0);
    match kind {
        StateKind::Qubit => {
            if n_qubits != 1 {
                return Err(Error::invalid(format!(
                    "the qubit model is defined for N=1, got N={n_qubits}"
                )));
            }
            // Spin-up initial state: amplitude on mu = +1/2.
            SymmetricState::new_pure(1, vec![Complex64::ZERO, one])
        }
        StateKind::Css => {
            let mut amps = vec![Complex64::ZERO; dim];
            amps[0] = one; // mu = -N/2, i.e. |down>^N
            SymmetricState::new_pure(n_qubits, amps)
        }
        StateKind::Tfs => {
            if n_qubits % 2 != 0 {
                return Err(Error::invalid(format!(
                    "twin-Fock state requires an even qubit number, got N={n_qubits}"
                )));
            }
            let mut amps = vec![Complex64::ZERO; dim];
            amps[n_qubits / 2] = one; // mu = 0
            SymmetricState::new_pure(n_qubits, amps)
        }
        StateKind::DepolarizedTfs { epsilon } => {
            if !(0.0..=1.0).contains(&epsilon) {
                return Err(Error::invalid(format!(
                    "depolarization strength must lie in [0, 1], got {epsilon}"
                )));
            }
            if n_qubits % 2 != 0 {
                return Err(Error::invalid(format!(
                    "twin-Fock state requires an even qubit number, got N={n_qubits}"
                )));
            }
            let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
            let tfs = n_qubits / 2;
            rho[(tfs, tfs)] = Complex64::new(1.0 - epsilon, 0.0);
            let background = Complex64::new(epsilon / dim as f64, 0.0);
            for k in 0..dim {
                rho[(k, k)] += background;
            }
            SymmetricState::new_mixed(n_qubits, rho)
        }
        StateKind::Oat { chi_t } => {
            // CSS polarized along +x: rotate |down>^N by pi/2 about J_y.
            let rotor = SpinRotor::new(n_qubits);
            let mut css = vec![Complex64::ZERO; dim];
            css[0] = one;
            let carrier = rotor.carrier(&css);
            let mut amps = rotor.rotate_carrier(&carrier, std::f64::consts::FRAC_PI_2);
            let half = n_qubits as f64 / 2.0;
            for (k, amp) in amps.iter_mut().enumerate() {
                let mu = k as f64 - half;
                let phase = -chi_t * mu * mu;
                *amp *= Complex64::new(phase.cos(), phase.sin());
            }
            // Renormalize away the rotation's last-bit rounding.
            let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for amp in &mut amps {
                *amp /= norm;
            }
            SymmetricState::new_pure(n_qubits, amps)
        }
    }
}
