//! Training-set generation: sampling (outcome, label) pairs from a likelihood
//! model over a parameter grid, plus empirical frequency tables and a
//! versioned columnar text format for persisting data sets.
//!
//! Generation is single-threaded per seed stream so a (model, allocation,
//! seed) triple always produces a byte-identical data set; completed sets are
//! immutable and safe to share.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::spin::{LikelihoodModel, ModelDescriptor, OutcomeSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Uniform grid of d parameter labels on [theta_min, theta_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGrid {
    d: usize,
    theta_min: f64,
    theta_max: f64,
}

impl ThetaGrid {
    pub fn new(d: usize, theta_min: f64, theta_max: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("grid needs at least 2 points, got {d}")));
        }
        if !theta_min.is_finite() || !theta_max.is_finite() || theta_min >= theta_max {
            return Err(Error::invalid(format!(
                "grid endpoints must be finite with theta_min < theta_max, got [{theta_min}, {theta_max}]"
            )));
        }
        Ok(ThetaGrid { d, theta_min, theta_max })
    }

    /// The default estimation domain [0, pi].
    pub fn over_half_turn(d: usize) -> Result<Self> {
        Self::new(d, 0.0, std::f64::consts::PI)
    }

    pub fn len(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// Grid spacing delta-theta.
    pub fn delta(&self) -> f64 {
        (self.theta_max - self.theta_min) / (self.d - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        debug_assert!(j < self.d);
        self.theta_min + self.delta() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.d).map(|j| self.point(j)).collect()
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.theta_min - 1e-12 && theta <= self.theta_max + 1e-12
    }

    pub fn nearest_index(&self, theta: f64) -> usize {
        let raw = (theta - self.theta_min) / self.delta();
        (raw.round().max(0.0) as usize).min(self.d - 1)
    }

    /// Same endpoints at twice the density: 2d-1 points with spacing delta/2.
    pub fn refine_double(&self) -> ThetaGrid {
        ThetaGrid { d: 2 * self.d - 1, theta_min: self.theta_min, theta_max: self.theta_max }
    }
}

/// How the measurement budget is spread over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationShape {
    Uniform,
    /// Zero weight below `cut_index`, uniform from `cut_index` on.
    Step { cut_index: usize },
    Custom { weights: Vec<f64> },
}

/// Normalized per-label weights q and the integer counts they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingAllocation {
    weights: Vec<f64>,
    counts: Vec<u64>,
    m_train: u64,
}

impl TrainingAllocation {
    /// Weights q(theta_j), summing to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integer counts m_theta_j, summing to `m_train` exactly.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn m_train(&self) -> u64 {
        self.m_train
    }

    /// The allocation as a probability density over the grid
    /// (q_j / delta-theta), for comparison against extracted priors.
    pub fn density(&self, grid: &ThetaGrid) -> Vec<f64> {
        self.weights.iter().map(|q| q / grid.delta()).collect()
    }
}

/// Splits `m_train` measurements over the grid by largest-remainder rounding
/// of m_train * q_j, so every count is within one of its real-valued target.
pub fn allocate(grid: &ThetaGrid, shape: &AllocationShape, m_train: u64) -> Result<TrainingAllocation> {
    let d = grid.len();
    let weights: Vec<f64> = match shape {
        AllocationShape::Uniform => {
            if m_train < d as u64 {
                return Err(Error::invalid(format!(
                    "uniform allocation needs m_train >= d ({d}), got {m_train}"
                )));
            }
            vec![1.0 / d as f64; d]
        }
        AllocationShape::Step { cut_index } => {
            if *cut_index >= d {
                return Err(Error::invalid(format!(
                    "step cut index {cut_index} outside grid of {d} points"
                )));
            }
            let live = (d - cut_index) as f64;
            (0..d).map(|j| if j < *cut_index { 0.0 } else { 1.0 / live }).collect()
        }
        AllocationShape::Custom { weights } => {
            if weights.len() != d {
                return Err(Error::invalid(format!(
                    "custom weights have {} entries for a grid of {d} points",
                    weights.len()
                )));
            }
            if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
                return Err(Error::invalid("custom weights must be finite and nonnegative"));
            }
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                return Err(Error::invalid("custom weights must not all be zero"));
            }
            weights.iter().map(|w| w / total).collect()
        }
    };

    // Largest-remainder rounding; remainders tie toward lower indices.
    let targets: Vec<f64> = weights.iter().map(|q| q * m_train as f64).collect();
    let mut counts: Vec<u64> = targets.iter().map(|t| t.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        let fa = targets[a] - targets[a].floor();
        let fb = targets[b] - targets[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &j in order.iter().take((m_train - assigned) as usize) {
        counts[j] += 1;
    }
    debug_assert_eq!(counts.iter().sum::<u64>(), m_train);
    Ok(TrainingAllocation { weights, counts, m_train })
}

/// A sampled training set: shuffled (outcome index, label index) records plus
/// the per-cell count matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    grid: ThetaGrid,
    outcomes: OutcomeSet,
    descriptor: Option<ModelDescriptor>,
    seed: u64,
    records: Vec<(u32, u32)>,
    /// counts[mu][j], row-major n_outcomes x d.
    counts: Vec<u64>,
    per_label: Vec<u64>,
}

impl TrainingSet {
    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    pub fn outcomes(&self) -> &OutcomeSet {
        &self.outcomes
    }

    pub fn descriptor(&self) -> Option<&ModelDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Shuffled (outcome index, label index) pairs, ready for mini-batching.
    pub fn records(&self) -> &[(u32, u32)] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, outcome_idx: usize, label_idx: usize) -> u64 {
        self.counts[outcome_idx * self.grid.len() + label_idx]
    }

    /// Measurements per grid point, m_theta_j.
    pub fn per_label_counts(&self) -> &[u64] {
        &self.per_label
    }

    fn from_records(
        grid: ThetaGrid,
        outcomes: OutcomeSet,
        descriptor: Option<ModelDescriptor>,
        seed: u64,
        records: Vec<(u32, u32)>,
    ) -> Result<Self> {
        let n_mu = outcomes.len();
        let d = grid.len();
        let mut counts = vec![0u64; n_mu * d];
        let mut per_label = vec![0u64; d];
        for &(mu, j) in &records {
            if mu as usize >= n_mu || j as usize >= d {
                return Err(Error::invalid(format!(
                    "record ({mu}, {j}) outside outcome set of {n_mu} / grid of {d}"
                )));
            }
            counts[mu as usize * d + j as usize] += 1;
            per_label[j as usize] += 1;
        }
        Ok(TrainingSet { grid, outcomes, descriptor, seed, records, counts, per_label })
    }
}

/// Draws `alloc.counts()[j]` i.i.d. outcomes from P(mu|theta_j) for every grid
/// point, then shuffles the records with the same seeded stream.
pub fn generate_training_set(
    model: &LikelihoodModel,
    grid: &ThetaGrid,
    alloc: &TrainingAllocation,
    seed: u64,
) -> Result<TrainingSet> {
    if alloc.counts().len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "allocation covers {} points, grid has {}",
            alloc.counts().len(),
            grid.len()
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut records: Vec<(u32, u32)> = Vec::with_capacity(alloc.m_train() as usize);
    for (j, &m_j) in alloc.counts().iter().enumerate() {
        if m_j == 0 {
            continue;
        }
        let cdf = cumulative(&model.likelihood(grid.point(j)));
        for _ in 0..m_j {
            let mu = draw(&cdf, &mut rng);
            records.push((mu as u32, j as u32));
        }
    }
    records.shuffle(&mut rng);
    TrainingSet::from_records(
        *grid,
        model.outcomes().clone(),
        model.descriptor(),
        seed,
        records,
    )
}

/// Draws an i.i.d. measurement sequence at `theta_true` (which need not lie on
/// any grid). Returns outcome indices into the model's outcome set.
pub fn sample_sequence(
    model: &LikelihoodModel,
    theta_true: f64,
    m: usize,
    seed: u64,
) -> Vec<u32> {
    assert!(m >= 1, "sequence length must be at least 1");
    let cdf = cumulative(&model.likelihood(theta_true));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..m).map(|_| draw(&cdf, &mut rng) as u32).collect()
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], rng: &mut ChaCha12Rng) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Relative frequencies f[mu][j] = m_(mu,j) / m_j per grid column.
#[derive(Debug, Clone)]
pub struct FrequencyTable {
    values: Mat,
    defined: Vec<bool>,
}

impl FrequencyTable {
    pub fn new(values: Mat, defined: Vec<bool>) -> Result<Self> {
        if defined.len() != values.cols() {
            return Err(Error::invalid("defined flags must match the column count"));
        }
        for (j, &def) in defined.iter().enumerate() {
            if !def {
                continue;
            }
            let total: f64 = (0..values.rows()).map(|mu| values[(mu, j)]).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "frequency column {j} sums to {total}, not 1"
                )));
            }
        }
        Ok(FrequencyTable { values, defined })
    }

    /// n_outcomes x d frequency matrix; columns without data are zero-filled
    /// but flagged undefined.
    pub fn values(&self) -> &Mat {
        &self.values
    }

    /// Whether column j had any measurements.
    pub fn defined(&self) -> &[bool] {
        &self.defined
    }
}

/// Empirical frequencies of the training set. Columns with no measurements
/// are flagged empty rather than zero-filled.
pub fn empirical_frequencies(ts: &TrainingSet) -> FrequencyTable {
    let n_mu = ts.outcomes().len();
    let d = ts.grid().len();
    let mut values = Mat::zeros(n_mu, d);
    let mut defined = vec![false; d];
    for j in 0..d {
        let total = ts.per_label_counts()[j];
        if total == 0 {
            continue;
        }
        defined[j] = true;
        for mu in 0..n_mu {
            values[(mu, j)] = ts.count(mu, j) as f64 / total as f64;
        }
    }
    FrequencyTable { values, defined }
}

const FILE_TAG: &str = "qbayes training set v1";

impl TrainingSet {
    /// Writes the set as columnar text: `#`-prefixed header lines followed by
    /// one `mu_value<TAB>label_index` row per record.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "# {FILE_TAG}")?;
        match &self.descriptor {
            Some(desc) => writeln!(w, "# model: {}", desc.to_json())?,
            None => writeln!(w, "# model: custom")?,
        }
        writeln!(w, "# outcomes: {}", serde_json::to_string(self.outcomes.values()).unwrap())?;
        writeln!(w, "# grid: {}", serde_json::to_string(&self.grid).unwrap())?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# m_train: {}", self.records.len())?;
        writeln!(w, "# columns: mu_value label_index")?;
        for &(mu, j) in &self.records {
            writeln!(w, "{}\t{}", self.outcomes.value(mu as usize), j)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Format("empty training set file".into()))??;
        if first.trim() != format!("# {FILE_TAG}") {
            return Err(Error::Format(format!("unrecognized training set header `{first}`")));
        }
        let mut descriptor = None;
        let mut outcomes = None;
        let mut grid = None;
        let mut seed = 0u64;
        let mut records: Vec<(u32, u32)> = Vec::new();
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("model:") {
                    let v = v.trim();
                    if v != "custom" {
                        descriptor = Some(ModelDescriptor::from_json(v)?);
                    }
                } else if let Some(v) = rest.strip_prefix("outcomes:") {
                    let values: Vec<f64> = serde_json::from_str(v.trim())
                        .map_err(|e| Error::Format(format!("outcomes header: {e}")))?;
                    outcomes = Some(OutcomeSet::new(values)?);
                } else if let Some(v) = rest.strip_prefix("grid:") {
                    let g: ThetaGrid = serde_json::from_str(v.trim())
                        .map_err(|e| Error::Format(format!("grid header: {e}")))?;
                    grid = Some(g);
                } else if let Some(v) = rest.strip_prefix("seed:") {
                    seed = v
                        .trim()
                        .parse()
                        .map_err(|e| Error::Format(format!("seed header: {e}")))?;
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (mu_txt, j_txt) = (parts.next(), parts.next());
            let (mu_txt, j_txt) = match (mu_txt, j_txt) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(Error::Format(format!("malformed record line `{line}`"))),
            };
            let mu_value: f64 = mu_txt
                .parse()
                .map_err(|e| Error::Format(format!("bad outcome value `{mu_txt}`: {e}")))?;
            let j: u32 = j_txt
                .parse()
                .map_err(|e| Error::Format(format!("bad label index `{j_txt}`: {e}")))?;
            let set = outcomes
                .as_ref()
                .ok_or_else(|| Error::Format("record before outcomes header".into()))?;
            let mu = set
                .index_of(mu_value)
                .ok_or_else(|| Error::Format(format!("outcome {mu_value} not in outcome set")))?;
            records.push((mu as u32, j));
        }
        let outcomes = outcomes.ok_or_else(|| Error::Format("missing outcomes header".into()))?;
        let grid = grid.ok_or_else(|| Error::Format("missing grid header".into()))?;
        TrainingSet::from_records(grid, outcomes, descriptor, seed, records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::StateKind;
    use std::f64::consts::PI;

    #[test]
    fn grid_spacing_is_uniform() {
        let grid = ThetaGrid::new(40, 0.0, PI).unwrap();
        let pts = grid.points();
        assert_eq!(pts.len(), 40);
        let delta = grid.delta();
        for w in pts.windows(2) {
            assert!((w[1] - w[0] - delta).abs() < 1e-14);
        }
        assert!(ThetaGrid::new(1, 0.0, PI).is_err());
        assert!(ThetaGrid::new(10, 1.0, 1.0).is_err());
    }

    #[test]
    fn refine_doubles_density() {
        let grid = ThetaGrid::new(40, 0.0, PI).unwrap();
        let fine = grid.refine_double();
        assert_eq!(fine.len(), 79);
        assert!((fine.delta() - grid.delta() / 2.0).abs() < 1e-15);
        assert_eq!(fine.theta_max(), grid.theta_max());
    }

    #[test]
    fn uniform_allocation_splits_evenly() {
        let grid = ThetaGrid::new(40, 0.0, PI).unwrap();
        let alloc = allocate(&grid, &AllocationShape::Uniform, 40_000).unwrap();
        assert!(alloc.counts().iter().all(|&c| c == 1000));
        assert_eq!(alloc.m_train(), 40_000);
    }

    #[test]
    fn step_allocation_zeroes_lower_half() {
        let grid = ThetaGrid::new(40, 0.0, PI).unwrap();
        let alloc = allocate(&grid, &AllocationShape::Step { cut_index: 20 }, 40_000).unwrap();
        assert!(alloc.counts()[..20].iter().all(|&c| c == 0));
        assert!(alloc.counts()[20..].iter().all(|&c| c == 2000));
    }

    #[test]
    fn point_mass_allocation() {
        let grid = ThetaGrid::new(10, 0.0, PI).unwrap();
        let mut weights = vec![0.0; 10];
        weights[5] = 3.0;
        let alloc = allocate(&grid, &AllocationShape::Custom { weights }, 777).unwrap();
        assert_eq!(alloc.counts()[5], 777);
        assert_eq!(alloc.counts().iter().sum::<u64>(), 777);
    }

    #[test]
    fn largest_remainder_rounding_is_within_one() {
        let grid = ThetaGrid::new(7, 0.0, PI).unwrap();
        let weights: Vec<f64> = (0..7).map(|j| (j as f64 + 0.3).powf(1.7)).collect();
        let m = 1001u64;
        let alloc = allocate(&grid, &AllocationShape::Custom { weights }, m).unwrap();
        assert_eq!(alloc.counts().iter().sum::<u64>(), m);
        for (q, &c) in alloc.weights().iter().zip(alloc.counts()) {
            assert!((c as f64 - q * m as f64).abs() < 1.0);
        }
    }

    #[test]
    fn negative_weights_rejected() {
        let grid = ThetaGrid::new(4, 0.0, PI).unwrap();
        let shape = AllocationShape::Custom { weights: vec![0.5, -0.1, 0.3, 0.3] };
        assert!(allocate(&grid, &shape, 100).is_err());
    }

    #[test]
    fn deterministic_outcome_at_theta_zero() {
        // P(up|0) = 1, so every record at label 0 must be outcome `up`.
        let model = LikelihoodModel::qubit();
        let grid = ThetaGrid::new(10, 0.0, PI).unwrap();
        let mut weights = vec![0.0; 10];
        weights[0] = 1.0;
        let alloc = allocate(&grid, &AllocationShape::Custom { weights }, 200).unwrap();
        let ts = generate_training_set(&model, &grid, &alloc, 99).unwrap();
        let up = ts.outcomes().index_of(0.5).unwrap();
        assert!(ts.records().iter().all(|&(mu, j)| mu as usize == up && j == 0));
    }

    #[test]
    fn counts_sum_to_budget() {
        let model = LikelihoodModel::from_kind(StateKind::Css, 4, None).unwrap();
        let grid = ThetaGrid::new(13, 0.0, PI).unwrap();
        let alloc = allocate(&grid, &AllocationShape::Uniform, 1300).unwrap();
        let ts = generate_training_set(&model, &grid, &alloc, 5).unwrap();
        assert_eq!(ts.len(), 1300);
        let total: u64 = (0..5).map(|mu| (0..13).map(|j| ts.count(mu, j)).sum::<u64>()).sum();
        assert_eq!(total, 1300);
        assert_eq!(ts.per_label_counts().iter().sum::<u64>(), 1300);
    }

    #[test]
    fn frequencies_match_binomial_bound() {
        // theta = pi/2 is a fair coin; 4 sigma at m = 1e5 is 0.0063.
        let model = LikelihoodModel::qubit();
        let grid = ThetaGrid::new(3, 0.0, PI).unwrap();
        let mut weights = vec![0.0; 3];
        weights[1] = 1.0;
        let alloc = allocate(&grid, &AllocationShape::Custom { weights }, 100_000).unwrap();
        let ts = generate_training_set(&model, &grid, &alloc, 31).unwrap();
        let freqs = empirical_frequencies(&ts);
        let up = ts.outcomes().index_of(0.5).unwrap();
        let f_up = freqs.values()[(up, 1)];
        assert!((0.494..=0.506).contains(&f_up), "f_up = {f_up}");
        assert!(!freqs.defined()[0] && freqs.defined()[1] && !freqs.defined()[2]);
    }

    #[test]
    fn generation_is_deterministic() {
        let model = LikelihoodModel::from_kind(StateKind::Tfs, 6, None).unwrap();
        let grid = ThetaGrid::new(21, 0.0, PI / 2.0).unwrap();
        let alloc = allocate(&grid, &AllocationShape::Uniform, 2100).unwrap();
        let a = generate_training_set(&model, &grid, &alloc, 1234).unwrap();
        let b = generate_training_set(&model, &grid, &alloc, 1234).unwrap();
        assert_eq!(a, b);
        let c = generate_training_set(&model, &grid, &alloc, 1235).unwrap();
        assert_ne!(a.records(), c.records());
    }

    #[test]
    fn sequence_frequencies_converge() {
        let model = LikelihoodModel::qubit();
        let theta = 0.6 * PI;
        let probs = model.likelihood(theta);
        let tv = |m: usize, seed: u64| -> f64 {
            let seq = sample_sequence(&model, theta, m, seed);
            let mut hist = vec![0.0; probs.len()];
            for &s in &seq {
                hist[s as usize] += 1.0 / m as f64;
            }
            0.5 * hist.iter().zip(&probs).map(|(h, p)| (h - p).abs()).sum::<f64>()
        };
        let coarse = tv(100, 7);
        let fine = tv(10_000, 7);
        // Expect a factor ~10 reduction; allow a factor 10 either way.
        assert!(fine <= coarse, "TV did not decrease: {coarse} -> {fine}");
        assert!(fine >= coarse / 100.0, "TV fell implausibly fast: {coarse} -> {fine}");
    }

    #[test]
    fn save_load_round_trip() {
        let model = LikelihoodModel::from_kind(StateKind::Css, 3, None).unwrap();
        let grid = ThetaGrid::new(11, 0.0, PI).unwrap();
        let alloc = allocate(&grid, &AllocationShape::Uniform, 110).unwrap();
        let ts = generate_training_set(&model, &grid, &alloc, 2024).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.txt");
        ts.save(&path).unwrap();
        let loaded = TrainingSet::load(&path).unwrap();
        assert_eq!(ts, loaded);
        // Byte-identical re-serialization.
        let path2 = dir.path().join("train2.txt");
        loaded.save(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }
}
