//! Bayesian parameter estimation for quantum sensors with a neural-network
//! classifier.
//!
//! A sensor run produces a measurement result `mu` whose distribution
//! P(mu|theta) depends on an unknown phase. This crate trains a small dense
//! softmax classifier on single measurements labelled by grid phases; the
//! network output is then a discretized single-shot posterior. From there:
//!
//! - [`bayes::extract_prior`] recovers the prior induced by the training-data
//!   allocation as the fixed point of a consistency relation;
//! - [`bayes::BayesEstimator`] composes posteriors for arbitrarily long
//!   measurement sequences in log space from the single-shot tables;
//! - [`calibration`] provides the conventional baseline (relative frequencies
//!   smoothed with a cubic interpolation, flat-prior Bayes);
//! - [`spin`] supplies exact collective-spin models (coherent, twin-Fock,
//!   depolarized, one-axis-twisted states, optional Gaussian detection blur)
//!   used both as data generators and as the ground-truth oracle;
//! - [`evaluation`] runs seeded Monte Carlo trials and reports posterior
//!   variance, bias and MSE against the standard quantum limit and the
//!   Cramer-Rao bound.
//!
//! Everything is deterministic given its seeds. With the default `parallel`
//! feature, trial loops and the larger dense kernels run on rayon; results
//! are bit-identical to the sequential build (`--no-default-features`).

pub mod bayes;
pub mod calibration;
pub mod dataset;
mod error;
pub mod evaluation;
pub mod linalg;
pub mod net;
mod par;
pub mod seeds;
pub mod spin;

pub use error::{Error, Result};

pub use bayes::{
    asymptotic_reference, compose_posterior, exact_posterior, extract_prior, map_estimate,
    posterior_mse, posterior_variance, single_shot_posteriors, AsymptoticReference,
    BayesEstimator, GridDistribution, LikelihoodSource, OracleEstimator, PriorExtraction,
    SingleShotTable,
};
pub use calibration::{calibrate, calibration_posterior, CalibratedLikelihood, CalibrationPosterior};
pub use dataset::{
    allocate, empirical_frequencies, generate_training_set, sample_sequence, AllocationShape,
    FrequencyTable, ThetaGrid, TrainingAllocation, TrainingSet,
};
pub use evaluation::{
    bounds, compare_backends, run_trials, summaries_to_csv, trial_seed, Backend, Bounds,
    CellSummary, TrialConfig, TrialSummary,
};
pub use net::{
    gradient, init, load_checkpoint, loss, save_checkpoint, train, AdamParams, CheckpointMeta,
    DenseNetwork, NetworkConfig, NetworkGradients, TrainOutcome, TrainSpec,
};
pub use spin::{
    apply_detection_noise, fisher_information, make_state, qubit_likelihood, wigner_rotation,
    DetectionNoise, FisherEstimate, LikelihoodModel, ModelDescriptor, OutcomeSet, SpinRotor,
    StateKind, SymmetricState,
};
