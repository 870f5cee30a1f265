//! Bayesian machinery on the parameter grid.
//!
//! The trained classifier supplies one discretized posterior per measurement
//! outcome. This module turns those rows into a full estimation pipeline:
//! the training prior is recovered as the fixed point of the consistency
//! relation p_j = sum_mu P(theta_j|mu) sum_k P(mu|theta_k) p_k dtheta, long
//! measurement sequences are composed in log space, and point estimates with
//! uncertainties are read off the composed posterior. An exact-Bayes oracle
//! built from the true likelihoods provides the reference line.

use crate::dataset::{FrequencyTable, ThetaGrid};
use crate::error::{Error, Result};
use crate::linalg::{matmul_nt, matvec_into, Mat};
use crate::net::DenseNetwork;
use crate::par;
use crate::spin::{LikelihoodModel, OutcomeSet};
use std::io::Write;

/// A probability density over a [`ThetaGrid`]: values are nonnegative and
/// sum_j values_j * dtheta = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDistribution {
    grid: ThetaGrid,
    values: Vec<f64>,
}

impl GridDistribution {
    pub fn new(grid: ThetaGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values on a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::invalid("distribution values must be finite and nonnegative"));
        }
        let total: f64 = values.iter().sum::<f64>() * grid.delta();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "distribution must integrate to 1 on the grid, got {total}"
            )));
        }
        Ok(GridDistribution { grid, values })
    }

    /// Normalizes nonnegative weights into a grid density.
    pub fn from_unnormalized(grid: ThetaGrid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values on a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = values.iter().sum::<f64>() * grid.delta();
        if total <= 0.0 {
            return Err(Error::DegeneratePosterior);
        }
        for v in &mut values {
            *v /= total;
        }
        Ok(GridDistribution { grid, values })
    }

    /// The flat density on the grid. Its value is 1/(d * dtheta), which is
    /// 1/(theta_max - theta_min) up to the d/(d-1) endpoint-inclusion factor;
    /// the grid-sum normalization sum_j p_j dtheta = 1 is exact.
    pub fn flat(grid: ThetaGrid) -> Self {
        let v = 1.0 / (grid.len() as f64 * grid.delta());
        GridDistribution { grid, values: vec![v; grid.len()] }
    }

    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Integrated absolute difference against another density on the same grid.
    pub fn l1_distance(&self, other: &GridDistribution) -> f64 {
        assert_eq!(self.grid, other.grid, "distributions live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.delta()
    }

    /// Mean of the density.
    pub fn mean(&self) -> f64 {
        let dt = self.grid.delta();
        self.values
            .iter()
            .enumerate()
            .map(|(j, &v)| v * self.grid.point(j))
            .sum::<f64>()
            * dt
    }

    /// Writes `theta density` rows, one grid point per line.
    pub fn write_two_column<W: Write>(&self, mut w: W) -> Result<()> {
        for (j, &v) in self.values.iter().enumerate() {
            writeln!(w, "{}\t{}", self.grid.point(j), v)?;
        }
        Ok(())
    }
}

/// Grid point of maximal posterior density; ties break toward the lowest index.
pub fn map_estimate(post: &GridDistribution) -> (f64, usize) {
    let mut best = 0;
    for (j, &v) in post.values().iter().enumerate() {
        if v > post.value(best) {
            best = j;
        }
    }
    (post.grid().point(best), best)
}

/// Posterior variance about the estimate:
/// sum_j p_j (theta_hat - theta_j)^2 dtheta.
pub fn posterior_variance(post: &GridDistribution, theta_hat: f64) -> f64 {
    second_moment_about(post, theta_hat)
}

/// Posterior mean-square error about the true value:
/// sum_j p_j (theta_true - theta_j)^2 dtheta.
pub fn posterior_mse(post: &GridDistribution, theta_true: f64) -> f64 {
    second_moment_about(post, theta_true)
}

fn second_moment_about(post: &GridDistribution, center: f64) -> f64 {
    let grid = post.grid();
    let dt = grid.delta();
    post.values()
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let diff = center - grid.point(j);
            p * diff * diff
        })
        .sum::<f64>()
        * dt
}

/// Where the likelihood estimate in a [`SingleShotTable`] comes from.
pub enum LikelihoodSource<'a> {
    /// The ideal model likelihood P(mu|theta_k) evaluated on the grid.
    ExactModel(&'a LikelihoodModel),
    /// Relative frequencies from the training data.
    EmpiricalFrequencies(&'a FrequencyTable),
}

/// Single-measurement posterior rows P(theta_j|mu) (network outputs divided
/// by dtheta): the raw material of both prior extraction and composition.
pub fn single_shot_posteriors(
    net: &DenseNetwork,
    outcomes: &OutcomeSet,
    grid: &ThetaGrid,
) -> Result<Mat> {
    if net.output_dim() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "network outputs {} labels but the grid has {} points",
            net.output_dim(),
            grid.len()
        )));
    }
    let inv_dt = 1.0 / grid.delta();
    let rows: Vec<Result<Vec<f64>>> = par::map_indexed(outcomes.len(), |i| {
        let mut a = net.forward(outcomes.value(i))?;
        for x in &mut a {
            *x *= inv_dt;
        }
        Ok(a)
    });
    let mut table = Mat::zeros(outcomes.len(), grid.len());
    for (i, row) in rows.into_iter().enumerate() {
        table.row_mut(i).copy_from_slice(&row?);
    }
    Ok(table)
}

/// Builds the likelihood estimate P(mu|theta_k). Empty empirical columns are
/// filled uniformly and counted as warnings; a fully empty table is rejected.
pub fn choose_likelihood(
    source: &LikelihoodSource,
    outcomes: &OutcomeSet,
    grid: &ThetaGrid,
) -> Result<(Mat, usize)> {
    match source {
        LikelihoodSource::ExactModel(model) => {
            if model.outcomes() != outcomes {
                return Err(Error::GridMismatch(
                    "model outcome set differs from the table's".into(),
                ));
            }
            Ok((model.likelihood_table(&grid.points()), 0))
        }
        LikelihoodSource::EmpiricalFrequencies(freqs) => {
            let n_mu = outcomes.len();
            if freqs.values().rows() != n_mu || freqs.values().cols() != grid.len() {
                return Err(Error::GridMismatch(
                    "frequency table shape differs from outcomes x grid".into(),
                ));
            }
            if freqs.defined().iter().all(|&d| !d) {
                return Err(Error::invalid(
                    "every grid column of the frequency table is empty",
                ));
            }
            let mut table = freqs.values().clone();
            let uniform = 1.0 / n_mu as f64;
            let mut warnings = 0;
            for (k, &defined) in freqs.defined().iter().enumerate() {
                if !defined {
                    warnings += 1;
                    for mu in 0..n_mu {
                        table[(mu, k)] = uniform;
                    }
                }
            }
            Ok((table, warnings))
        }
    }
}

/// Per-outcome posterior rows plus a likelihood estimate over the same grid.
#[derive(Debug, Clone)]
pub struct SingleShotTable {
    grid: ThetaGrid,
    outcomes: OutcomeSet,
    /// Row mu: density over theta, normalized to integrate to 1.
    posteriors: Mat,
    /// Column k: distribution over mu, summing to 1.
    likelihood: Mat,
    likelihood_warnings: usize,
}

impl SingleShotTable {
    pub fn new(
        grid: ThetaGrid,
        outcomes: OutcomeSet,
        posteriors: Mat,
        likelihood: Mat,
        likelihood_warnings: usize,
    ) -> Result<Self> {
        let n_mu = outcomes.len();
        let d = grid.len();
        if posteriors.rows() != n_mu || posteriors.cols() != d {
            return Err(Error::GridMismatch("posterior table has the wrong shape".into()));
        }
        if likelihood.rows() != n_mu || likelihood.cols() != d {
            return Err(Error::GridMismatch("likelihood table has the wrong shape".into()));
        }
        let dt = grid.delta();
        for mu in 0..n_mu {
            let total: f64 = posteriors.row(mu).iter().sum::<f64>() * dt;
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "posterior row {mu} integrates to {total}, not 1"
                )));
            }
        }
        for k in 0..d {
            let total: f64 = (0..n_mu).map(|mu| likelihood[(mu, k)]).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "likelihood column {k} sums to {total}, not 1"
                )));
            }
        }
        Ok(SingleShotTable { grid, outcomes, posteriors, likelihood, likelihood_warnings })
    }

    /// Assembles the table from a trained network and a likelihood source.
    pub fn from_network(
        net: &DenseNetwork,
        outcomes: &OutcomeSet,
        grid: &ThetaGrid,
        source: &LikelihoodSource,
    ) -> Result<Self> {
        let posteriors = single_shot_posteriors(net, outcomes, grid)?;
        let (likelihood, warnings) = choose_likelihood(source, outcomes, grid)?;
        Self::new(*grid, outcomes.clone(), posteriors, likelihood, warnings)
    }

    /// The ideal table: exact likelihoods and flat-prior Bayes rows. Used by
    /// oracle comparisons and as the infinite-training-data limit.
    pub fn from_model(model: &LikelihoodModel, grid: &ThetaGrid) -> Result<Self> {
        let likelihood = model.likelihood_table(&grid.points());
        let n_mu = model.outcomes().len();
        let dt = grid.delta();
        let mut posteriors = Mat::zeros(n_mu, grid.len());
        for mu in 0..n_mu {
            let total: f64 = likelihood.row(mu).iter().sum::<f64>() * dt;
            if total <= 0.0 {
                return Err(Error::invalid(format!(
                    "outcome index {mu} has zero probability everywhere on the grid"
                )));
            }
            for (slot, &l) in posteriors.row_mut(mu).iter_mut().zip(likelihood.row(mu)) {
                *slot = l / total;
            }
        }
        Self::new(*grid, model.outcomes().clone(), posteriors, likelihood, 0)
    }

    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    pub fn outcomes(&self) -> &OutcomeSet {
        &self.outcomes
    }

    pub fn posterior_row(&self, mu: usize) -> &[f64] {
        self.posteriors.row(mu)
    }

    pub fn likelihood(&self) -> &Mat {
        &self.likelihood
    }

    /// Number of empty frequency columns that were filled uniformly.
    pub fn likelihood_warnings(&self) -> usize {
        self.likelihood_warnings
    }
}

/// Result of the prior fixed-point extraction.
#[derive(Debug, Clone)]
pub struct PriorExtraction {
    pub prior: GridDistribution,
    /// dtheta-weighted L1 norm of (I - M) p at the returned prior.
    pub residual: f64,
    pub iterations: usize,
}

const PRIOR_TOL: f64 = 1e-12;
const PRIOR_MAX_ITER: usize = 100_000;
const PRIOR_RESIDUAL_LIMIT: f64 = 1e-9;

/// Recovers the training prior from the table by solving (I - M) p = 0 with
/// M_jk = sum_mu P(theta_j|mu) P(mu|theta_k) dtheta.
///
/// Power iteration from the uniform density, which preserves nonnegativity;
/// M's dominant eigenvalue is 1 by construction for normalized tables. If the
/// iteration stalls above the residual target, one round of shifted inverse
/// iteration polishes the vector.
pub fn extract_prior(table: &SingleShotTable) -> Result<PriorExtraction> {
    let grid = table.grid;
    let d = grid.len();
    let dt = grid.delta();
    let post_t = table.posteriors.transpose();
    let lik_t = table.likelihood.transpose();
    let mut m = matmul_nt(&post_t, &lik_t);
    for v in m.data_mut() {
        *v *= dt;
    }

    let mut p = GridDistribution::flat(grid).values().to_vec();
    let mut next = vec![0.0; d];
    let mut iterations = 0;
    for it in 1..=PRIOR_MAX_ITER {
        iterations = it;
        matvec_into(&mut next, &m, &p);
        let total: f64 = next.iter().sum::<f64>() * dt;
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::DegeneratePosterior);
        }
        let mut change = 0.0;
        for (n, old) in next.iter_mut().zip(&p) {
            *n /= total;
            change += (*n - old).abs();
        }
        std::mem::swap(&mut p, &mut next);
        if change * dt < PRIOR_TOL {
            break;
        }
    }

    let mut residual = prior_residual(&m, &p, dt);
    if residual > PRIOR_RESIDUAL_LIMIT {
        // Shifted inverse iteration around the known eigenvalue 1.
        let md = nalgebra::DMatrix::<f64>::from_fn(d, d, |r, c| {
            m[(r, c)] - if r == c { 1.0 + 1e-10 } else { 0.0 }
        });
        let lu = md.lu();
        let mut x = nalgebra::DVector::<f64>::from_vec(p.clone());
        for _ in 0..50 {
            match lu.solve(&x) {
                Some(sol) => x = sol,
                None => break,
            }
            let total: f64 = x.iter().sum::<f64>() * dt;
            if total == 0.0 || !total.is_finite() {
                break;
            }
            x /= total;
            let candidate: Vec<f64> = x.iter().copied().collect();
            let r = prior_residual(&m, &candidate, dt);
            if r < residual {
                residual = r;
                p = candidate;
            }
            if residual < PRIOR_TOL {
                break;
            }
        }
    }
    if residual > PRIOR_RESIDUAL_LIMIT {
        return Err(Error::NonConvergence { residual, iterations });
    }

    // Noise in the table can leave tiny negatives; priors are densities.
    for v in &mut p {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let prior = GridDistribution::from_unnormalized(grid, p)?;
    Ok(PriorExtraction { prior, residual, iterations })
}

fn prior_residual(m: &Mat, p: &[f64], dt: f64) -> f64 {
    let mut mp = vec![0.0; p.len()];
    matvec_into(&mut mp, m, p);
    p.iter().zip(&mp).map(|(a, b)| (a - b).abs()).sum::<f64>() * dt
}

/// Sorted (outcome index, multiplicity) pairs of a sequence.
fn count_outcomes(sequence: &[usize], n_mu: usize) -> Result<Vec<(usize, f64)>> {
    let mut counts = vec![0u64; n_mu];
    for &idx in sequence {
        if idx >= n_mu {
            return Err(Error::invalid(format!(
                "sequence outcome index {idx} outside outcome set of {n_mu}"
            )));
        }
        counts[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|&(_, n)| n > 0)
        .map(|(i, n)| (i, n as f64))
        .collect())
}

/// Shared log-space composition: ln p_j = ln prior_j + sum_mu n_mu L[mu][j],
/// max-subtracted, exponentiated, renormalized. Grid points with zero prior
/// stay exactly zero.
fn log_compose(
    grid: ThetaGrid,
    prior: &[f64],
    log_rows: &Mat,
    counts: &[(usize, f64)],
) -> Result<GridDistribution> {
    let d = grid.len();
    let mut logp: Vec<f64> = prior.iter().map(|&p| p.ln()).collect();
    for &(mu, n) in counts {
        let row = log_rows.row(mu);
        for (slot, &l) in logp.iter_mut().zip(row) {
            *slot += n * l;
        }
    }
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegeneratePosterior);
    }
    let mut values = vec![0.0; d];
    let mut total = 0.0;
    for (v, &l) in values.iter_mut().zip(&logp) {
        *v = (l - max).exp();
        total += *v;
    }
    total *= grid.delta();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::DegeneratePosterior);
    }
    for v in &mut values {
        *v /= total;
    }
    Ok(GridDistribution { grid, values })
}

/// A table paired with its own prior: the deployable estimator.
///
/// Composition multiplies likelihood ratios
/// P(theta_j|mu) / P_table(theta_j), so chaining stays consistent: composing
/// m1 measurements and feeding the result into another composition of m2
/// equals composing all m1+m2 at once.
#[derive(Debug, Clone)]
pub struct BayesEstimator {
    table: SingleShotTable,
    prior: GridDistribution,
    /// log_ratio[mu][j] = ln P(theta_j|mu) - ln prior_j; forced to 0 where the
    /// prior vanishes (such points are pinned to zero by the prior factor).
    log_ratio: Mat,
}

impl BayesEstimator {
    pub fn new(table: SingleShotTable, prior: GridDistribution) -> Result<Self> {
        if prior.grid() != &table.grid {
            return Err(Error::GridMismatch("prior grid differs from table grid".into()));
        }
        let n_mu = table.outcomes.len();
        let d = table.grid.len();
        let mut log_ratio = Mat::zeros(n_mu, d);
        for mu in 0..n_mu {
            let post = table.posteriors.row(mu);
            let row = log_ratio.row_mut(mu);
            for j in 0..d {
                let p = prior.value(j);
                row[j] = if p > 0.0 { post[j].ln() - p.ln() } else { 0.0 };
            }
        }
        Ok(BayesEstimator { table, prior, log_ratio })
    }

    /// Builds the full pipeline: extract the prior from the table, then pair
    /// the two.
    pub fn from_table(table: SingleShotTable) -> Result<(Self, PriorExtraction)> {
        let extraction = extract_prior(&table)?;
        let estimator = Self::new(table, extraction.prior.clone())?;
        Ok((estimator, extraction))
    }

    pub fn table(&self) -> &SingleShotTable {
        &self.table
    }

    pub fn prior(&self) -> &GridDistribution {
        &self.prior
    }

    pub fn grid(&self) -> &ThetaGrid {
        &self.table.grid
    }

    /// Posterior for a measurement sequence (outcome indices), starting from
    /// the estimator's own prior.
    pub fn posterior(&self, sequence: &[usize]) -> Result<GridDistribution> {
        self.posterior_from(&self.prior, sequence)
    }

    /// Posterior starting from an explicit prior (e.g. the output of an
    /// earlier composition), with likelihood ratios held fixed.
    pub fn posterior_from(
        &self,
        prior: &GridDistribution,
        sequence: &[usize],
    ) -> Result<GridDistribution> {
        if prior.grid() != &self.table.grid {
            return Err(Error::GridMismatch("prior grid differs from table grid".into()));
        }
        let counts = count_outcomes(sequence, self.table.outcomes.len())?;
        log_compose(self.table.grid, prior.values(), &self.log_ratio, &counts)
    }
}

/// One-shot posterior composition (builds a [`BayesEstimator`] internally):
/// p_j proportional to prior_j * prod_i P(theta_j|mu_i) / prior_j.
pub fn compose_posterior(
    prior: &GridDistribution,
    table: &SingleShotTable,
    sequence: &[usize],
) -> Result<GridDistribution> {
    BayesEstimator::new(table.clone(), prior.clone())?.posterior(sequence)
}

/// Exact-Bayes reference: true likelihoods, explicit prior, same log-space
/// numerics as the network path. Build once, reuse across sequences.
#[derive(Debug, Clone)]
pub struct OracleEstimator {
    grid: ThetaGrid,
    prior: GridDistribution,
    log_lik: Mat,
    n_mu: usize,
}

impl OracleEstimator {
    pub fn new(model: &LikelihoodModel, prior: GridDistribution) -> Self {
        let grid = *prior.grid();
        let lik = model.likelihood_table(&grid.points());
        let mut log_lik = Mat::zeros(lik.rows(), lik.cols());
        for (slot, &v) in log_lik.data_mut().iter_mut().zip(lik.data()) {
            *slot = v.ln();
        }
        OracleEstimator { grid, prior, log_lik, n_mu: model.outcomes().len() }
    }

    pub fn prior(&self) -> &GridDistribution {
        &self.prior
    }

    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    pub fn posterior(&self, sequence: &[usize]) -> Result<GridDistribution> {
        let counts = count_outcomes(sequence, self.n_mu)?;
        log_compose(self.grid, self.prior.values(), &self.log_lik, &counts)
    }
}

/// Oracle Bayes posterior P(theta_j) prod_i P(mu_i|theta_j), normalized.
pub fn exact_posterior(
    model: &LikelihoodModel,
    prior: &GridDistribution,
    sequence: &[usize],
) -> Result<GridDistribution> {
    OracleEstimator::new(model, prior.clone()).posterior(sequence)
}

/// The large-m Gaussian limit, discretized and renormalized on the grid.
#[derive(Debug, Clone)]
pub struct AsymptoticReference {
    pub dist: GridDistribution,
    /// Set when dtheta > 0.5 / sqrt(m F): the grid cannot resolve the peak.
    pub grid_too_coarse: bool,
}

/// Gaussian centered at theta_true with variance 1/(m F), per the asymptotic
/// normality of the Bayesian posterior.
pub fn asymptotic_reference(
    grid: ThetaGrid,
    theta_true: f64,
    m: usize,
    fisher: f64,
) -> Result<AsymptoticReference> {
    let mf = m as f64 * fisher;
    if !(mf.is_finite() && mf > 0.0) {
        return Err(Error::invalid(format!("m * F must be positive, got {mf}")));
    }
    let values: Vec<f64> = (0..grid.len())
        .map(|j| {
            let diff = grid.point(j) - theta_true;
            (-mf * diff * diff / 2.0).exp()
        })
        .collect();
    let dist = GridDistribution::from_unnormalized(grid, values)?;
    let grid_too_coarse = grid.delta() > 0.5 / mf.sqrt();
    Ok(AsymptoticReference { dist, grid_too_coarse })
}
