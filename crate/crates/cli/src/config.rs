//! Declarative run configuration.
//!
//! One TOML file describes a full pipeline: the sensor model, the parameter
//! grid, how training data is collected and the network trained, and what the
//! evaluation harness should run. Unknown keys are hard errors so a typo in a
//! physics parameter cannot silently fall back to a default.

use crate::error::{CliError, CliResult};
use qbayes::{
    AdamParams, AllocationShape, DetectionNoise, LikelihoodModel, ModelDescriptor, StateKind,
    ThetaGrid, TrainSpec,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub training: TrainingSection,
    pub evaluation: EvaluationSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// qubit | css | tfs | depolarized_tfs | oat
    pub kind: String,
    pub n_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_sigma_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub d: usize,
    pub theta_min: f64,
    pub theta_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    /// uniform | step | custom
    pub allocation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_cut: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub m_train: u64,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon_adam: f64,
    /// Root seed; data generation, weight initialization and batch order are
    /// derived from it as independent streams.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    pub theta_true: Vec<f64>,
    pub m_values: Vec<usize>,
    pub n_trials: usize,
    pub base_seed: u64,
    /// exact | empirical (default exact) - likelihood estimate used when
    /// extracting the prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likelihood_source: Option<String>,
    /// network | calibration | oracle (default network) - backend for
    /// `evaluate`; `compare` always runs all three.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
    pub prefix: String,
}

/// Which likelihood estimate feeds the prior extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    Exact,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackendKind {
    Network,
    Calibration,
    Oracle,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validates every section against the module preconditions before any
    /// work starts.
    pub fn validate(&self) -> CliResult<()> {
        self.state_kind()?;
        self.build_model()?;
        self.build_grid()?;
        self.allocation_shape()?;
        if self.training.hidden.iter().any(|&w| w == 0) {
            return Err(CliError::Config("training.hidden: widths must be >= 1".into()));
        }
        if self.training.epochs == 0 {
            return Err(CliError::Config("training.epochs: must be >= 1".into()));
        }
        if self.training.batch_size == 0 {
            return Err(CliError::Config("training.batch_size: must be >= 1".into()));
        }
        if !(self.training.learning_rate.is_finite() && self.training.learning_rate > 0.0) {
            return Err(CliError::Config("training.learning_rate: must be positive".into()));
        }
        if self.evaluation.n_trials == 0 {
            return Err(CliError::Config("evaluation.n_trials: must be >= 1".into()));
        }
        if self.evaluation.m_values.iter().any(|&m| m == 0) {
            return Err(CliError::Config("evaluation.m_values: entries must be >= 1".into()));
        }
        let grid = self.build_grid()?;
        for &theta in &self.evaluation.theta_true {
            if !grid.contains(theta) {
                return Err(CliError::Config(format!(
                    "evaluation.theta_true: {theta} outside the grid domain [{}, {}]",
                    grid.theta_min(),
                    grid.theta_max()
                )));
            }
        }
        self.likelihood_source()?;
        self.backend_kind()?;
        if self.output.prefix.is_empty() {
            return Err(CliError::Config("output.prefix: must be nonempty".into()));
        }
        Ok(())
    }

    fn state_kind(&self) -> CliResult<StateKind> {
        let desc = ModelDescriptor {
            kind: self.model.kind.clone(),
            n: self.model.n_qubits,
            epsilon: self.model.epsilon,
            chi_t: self.model.chi_t,
            noise_sigma_sq: self.model.noise_sigma_sq,
        };
        desc.state_kind()
            .map_err(|e| CliError::Config(format!("model.kind: {e}")))
    }

    pub fn build_model(&self) -> CliResult<LikelihoodModel> {
        let kind = self.state_kind()?;
        let noise = match self.model.noise_sigma_sq {
            Some(s) => Some(
                DetectionNoise::new(s)
                    .map_err(|e| CliError::Config(format!("model.noise_sigma_sq: {e}")))?,
            ),
            None => None,
        };
        LikelihoodModel::from_kind(kind, self.model.n_qubits, noise)
            .map_err(|e| CliError::Config(format!("model: {e}")))
    }

    pub fn build_grid(&self) -> CliResult<ThetaGrid> {
        ThetaGrid::new(self.grid.d, self.grid.theta_min, self.grid.theta_max)
            .map_err(|e| CliError::Config(format!("grid: {e}")))
    }

    pub fn allocation_shape(&self) -> CliResult<AllocationShape> {
        match self.training.allocation.as_str() {
            "uniform" => Ok(AllocationShape::Uniform),
            "step" => {
                let cut = self.training.step_cut.ok_or_else(|| {
                    CliError::Config("training.step_cut: required for step allocation".into())
                })?;
                Ok(AllocationShape::Step { cut_index: cut })
            }
            "custom" => {
                let weights = self.training.weights.clone().ok_or_else(|| {
                    CliError::Config("training.weights: required for custom allocation".into())
                })?;
                Ok(AllocationShape::Custom { weights })
            }
            other => Err(CliError::Config(format!(
                "training.allocation: unknown shape `{other}` (uniform|step|custom)"
            ))),
        }
    }

    /// Seed streams derived from the root training seed.
    pub fn data_seed(&self, root: u64) -> u64 {
        qbayes::seeds::derive(root, &[0])
    }

    pub fn batch_seed(&self, root: u64) -> u64 {
        qbayes::seeds::derive(root, &[1])
    }

    pub fn init_seed(&self, root: u64) -> u64 {
        qbayes::seeds::derive(root, &[2])
    }

    pub fn train_spec(&self, root: u64) -> TrainSpec {
        TrainSpec {
            epochs: self.training.epochs,
            batch_size: self.training.batch_size,
            adam: AdamParams {
                step_size: self.training.learning_rate,
                beta1: self.training.beta1,
                beta2: self.training.beta2,
                epsilon: self.training.epsilon_adam,
            },
            seed: self.batch_seed(root),
        }
    }

    pub fn likelihood_source(&self) -> CliResult<SourceKind> {
        match self.evaluation.likelihood_source.as_deref() {
            None | Some("exact") => Ok(SourceKind::Exact),
            Some("empirical") => Ok(SourceKind::Empirical),
            Some(other) => Err(CliError::Config(format!(
                "evaluation.likelihood_source: `{other}` (exact|empirical)"
            ))),
        }
    }

    pub fn backend_kind(&self) -> CliResult<BackendKind> {
        match self.evaluation.backend.as_deref() {
            None | Some("network") => Ok(BackendKind::Network),
            Some("calibration") => Ok(BackendKind::Calibration),
            Some("oracle") => Ok(BackendKind::Oracle),
            Some(other) => Err(CliError::Config(format!(
                "evaluation.backend: `{other}` (network|calibration|oracle)"
            ))),
        }
    }

    pub fn out_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        override_dir
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(&self.output.dir))
    }

    pub fn artifact(&self, dir: &Path, suffix: &str) -> PathBuf {
        dir.join(format!("{}.{suffix}", self.output.prefix))
    }

    /// Canonical re-serialization (field order fixed by the schema).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    /// SHA-256 of the canonical serialization, truncated to 16 hex digits.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn descriptor(&self) -> CliResult<ModelDescriptor> {
        Ok(ModelDescriptor::new(
            self.state_kind()?,
            self.model.n_qubits,
            match self.model.noise_sigma_sq {
                Some(s) => Some(
                    DetectionNoise::new(s)
                        .map_err(|e| CliError::Config(format!("model.noise_sigma_sq: {e}")))?,
                ),
                None => None,
            },
        ))
    }
}
