//! Monte Carlo evaluation harness.
//!
//! Runs many seeded estimation trials against a read-only backend, aggregates
//! posterior variance, bias and MSE with standard errors, attaches the SQL and
//! Cramer-Rao bounds, and emits figure-ready CSV. Per-trial seeds are derived
//! by hashing (base_seed, m, t), so trials execute in parallel while the
//! aggregate stays byte-identical to a sequential run: results are collected
//! in trial order and reduced deterministically.

use crate::bayes::{map_estimate, posterior_mse, posterior_variance, BayesEstimator, GridDistribution, OracleEstimator};
use crate::calibration::{calibration_posterior, CalibratedLikelihood};
use crate::dataset::sample_sequence;
use crate::error::{Error, Result};
use crate::par;
use crate::seeds;
use crate::spin::{fisher_information, LikelihoodModel, ModelDescriptor, DEFAULT_FISHER_STEP};
use std::fmt::Write as _;

/// An estimator under test. All variants are read-only and shareable.
#[derive(Clone, Copy)]
pub enum Backend<'a> {
    Network(&'a BayesEstimator),
    Calibration(&'a CalibratedLikelihood),
    ExactOracle(&'a OracleEstimator),
}

impl<'a> Backend<'a> {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Network(_) => "network",
            Backend::Calibration(_) => "calibration",
            Backend::ExactOracle(_) => "oracle",
        }
    }

    fn posterior(&self, sequence: &[usize]) -> Result<GridDistribution> {
        match self {
            Backend::Network(est) => est.posterior(sequence),
            Backend::Calibration(cal) => Ok(calibration_posterior(cal, sequence)?.dist),
            Backend::ExactOracle(oracle) => oracle.posterior(sequence),
        }
    }

    fn domain(&self) -> (f64, f64) {
        let grid = match self {
            Backend::Network(est) => est.grid(),
            Backend::Calibration(cal) => cal.grid(),
            Backend::ExactOracle(oracle) => oracle.grid(),
        };
        (grid.theta_min(), grid.theta_max())
    }
}

/// One evaluation cell: a true phase, a list of sequence lengths, a trial
/// count and the base seed all per-trial seeds derive from.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub theta_true: f64,
    pub m_values: Vec<usize>,
    pub n_trials: usize,
    pub base_seed: u64,
}

/// The seed of trial `t` at sequence length `m`.
pub fn trial_seed(base_seed: u64, m: usize, t: usize) -> u64 {
    seeds::derive(base_seed, &[m as u64, t as u64])
}

/// Classical and quantum benchmark variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// Standard quantum limit 1/(m N).
    pub sql: f64,
    /// Cramer-Rao bound 1/(m F(theta)).
    pub crb: f64,
}

/// SQL and CRB for `m` repetitions at the given phase.
pub fn bounds(model: &LikelihoodModel, theta: f64, m: usize) -> Result<Bounds> {
    let fisher = fisher_information(model, theta, DEFAULT_FISHER_STEP).value;
    if !(fisher.is_finite() && fisher > 1e-12) {
        return Err(Error::ZeroFisherInformation { theta });
    }
    let m = m as f64;
    Ok(Bounds {
        sql: 1.0 / (m * model.n_qubits() as f64),
        crb: 1.0 / (m * fisher),
    })
}

/// Aggregates for one (theta_true, m) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub m: usize,
    pub n_trials: usize,
    /// Trials the backend could not evaluate (e.g. unobserved outcomes in the
    /// calibration table); excluded from the means.
    pub n_failed: usize,
    pub mean_variance: f64,
    pub se_variance: f64,
    pub mean_bias: f64,
    pub se_bias: f64,
    pub mean_mse: f64,
    pub se_mse: f64,
    pub sql: f64,
    pub crb: f64,
}

/// All cells of one backend at one true phase.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub backend: String,
    pub theta_true: f64,
    pub cells: Vec<CellSummary>,
}

struct TrialResult {
    variance: f64,
    bias: f64,
    mse: f64,
}

fn summarize(values: Vec<f64>) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Runs `cfg.n_trials` seeded trials for every m: sample a sequence from the
/// true model, compose the backend posterior, record estimator, variance and
/// MSE. Failed trials are counted and excluded from the means.
pub fn run_trials(
    model: &LikelihoodModel,
    backend: Backend,
    cfg: &TrialConfig,
) -> Result<TrialSummary> {
    if cfg.n_trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let (lo, hi) = backend.domain();
    if cfg.theta_true < lo || cfg.theta_true > hi {
        return Err(Error::invalid(format!(
            "theta_true {} outside the backend grid domain [{lo}, {hi}]",
            cfg.theta_true
        )));
    }
    let mut cells = Vec::with_capacity(cfg.m_values.len());
    for &m in &cfg.m_values {
        if m == 0 {
            return Err(Error::invalid("sequence length m must be at least 1"));
        }
        let results: Vec<Option<TrialResult>> = par::map_indexed(cfg.n_trials, |t| {
            let seed = trial_seed(cfg.base_seed, m, t);
            let seq_u32 = sample_sequence(model, cfg.theta_true, m, seed);
            let sequence: Vec<usize> = seq_u32.iter().map(|&x| x as usize).collect();
            match backend.posterior(&sequence) {
                Ok(post) => {
                    let (theta_hat, _) = map_estimate(&post);
                    Some(TrialResult {
                        variance: posterior_variance(&post, theta_hat),
                        bias: theta_hat - cfg.theta_true,
                        mse: posterior_mse(&post, cfg.theta_true),
                    })
                }
                Err(_) => None,
            }
        });
        let n_failed = results.iter().filter(|r| r.is_none()).count();
        let ok: Vec<TrialResult> = results.into_iter().flatten().collect();
        if ok.is_empty() {
            return Err(Error::invalid(format!(
                "every trial failed for backend {} at m = {m}",
                backend.name()
            )));
        }
        let (mean_variance, se_variance) = summarize(ok.iter().map(|r| r.variance).collect());
        let (mean_bias, se_bias) = summarize(ok.iter().map(|r| r.bias).collect());
        let (mean_mse, se_mse) = summarize(ok.iter().map(|r| r.mse).collect());
        let b = bounds(model, cfg.theta_true, m)?;
        cells.push(CellSummary {
            m,
            n_trials: cfg.n_trials,
            n_failed,
            mean_variance,
            se_variance,
            mean_bias,
            se_bias,
            mean_mse,
            se_mse,
            sql: b.sql,
            crb: b.crb,
        });
    }
    Ok(TrialSummary {
        backend: backend.name().to_string(),
        theta_true: cfg.theta_true,
        cells,
    })
}

/// Runs every backend over a sweep of true phases with shared trial seeds:
/// sequence t at (theta, m) is identical across backends, so rows align.
pub fn compare_backends(
    model: &LikelihoodModel,
    backends: &[Backend],
    theta_sweep: &[f64],
    m_values: &[usize],
    n_trials: usize,
    base_seed: u64,
) -> Result<Vec<TrialSummary>> {
    if backends.is_empty() {
        return Err(Error::invalid("need at least one backend"));
    }
    let reference = backends[0].domain();
    for b in backends {
        let dom = b.domain();
        if (dom.0 - reference.0).abs() > 1e-12 || (dom.1 - reference.1).abs() > 1e-12 {
            return Err(Error::GridMismatch(format!(
                "backend {} covers [{}, {}] but {} covers [{}, {}]",
                b.name(),
                dom.0,
                dom.1,
                backends[0].name(),
                reference.0,
                reference.1
            )));
        }
    }
    let mut out = Vec::with_capacity(backends.len() * theta_sweep.len());
    for backend in backends {
        for &theta in theta_sweep {
            let cfg = TrialConfig {
                theta_true: theta,
                m_values: m_values.to_vec(),
                n_trials,
                base_seed,
            };
            out.push(run_trials(model, *backend, &cfg)?);
        }
    }
    Ok(out)
}

/// CSV header for [`summaries_to_csv`]; one row per (backend, theta, m) cell.
pub const CSV_HEADER: &str = "backend,state_kind,N,theta_true,m,n_trials,n_failed,mean_variance,se_variance,mean_bias,se_bias,mean_mse,se_mse,sql,crb";

/// Renders summaries as CSV with the mandatory header row.
pub fn summaries_to_csv(summaries: &[TrialSummary], descriptor: &ModelDescriptor) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in summaries {
        for c in &s.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.backend,
                descriptor.kind,
                descriptor.n,
                s.theta_true,
                c.m,
                c.n_trials,
                c.n_failed,
                c.mean_variance,
                c.se_variance,
                c.mean_bias,
                c.se_bias,
                c.mean_mse,
                c.se_mse,
                c.sql,
                c.crb
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}
