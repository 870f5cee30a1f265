//! Calibration-based estimation baseline.
//!
//! The conventional route: estimate the likelihood function from relative
//! frequencies of calibration measurements, smooth each outcome's frequency
//! curve with a cubic interpolation onto a grid of twice the density, and run
//! a flat-prior Bayes product. Outcomes that never occurred in the
//! calibration data carry no probability and poison any sequence containing
//! them; that failure mode is surfaced as an error.

use crate::bayes::GridDistribution;
use crate::dataset::{FrequencyTable, ThetaGrid};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::spin::OutcomeSet;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Cubic spline with not-a-knot end conditions (the boundary rule of the
/// reference `interp1d` cubic). Needs at least 4 knots.
pub(crate) struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    moments: Vec<f64>,
}

impl CubicSpline {
    pub(crate) fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 4 {
            return Err(Error::invalid(format!(
                "cubic interpolation needs at least 4 support points, got {n}"
            )));
        }
        if ys.len() != n {
            return Err(Error::invalid("x and y lengths differ"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("spline knots must be strictly increasing"));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let rhs = |i: usize| {
            6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1])
        };

        // Reduced tridiagonal system for M[1..n-1] after eliminating M[0] and
        // M[n-1] with the not-a-knot conditions
        //   M[0]   = M[1]   - (h[0]/h[1])       (M[2]   - M[1]),
        //   M[n-1] = M[n-2] + (h[n-2]/h[n-3])   (M[n-2] - M[n-3]).
        let m_unknowns = n - 2;
        let mut sub = vec![0.0; m_unknowns];
        let mut diag = vec![0.0; m_unknowns];
        let mut sup = vec![0.0; m_unknowns];
        let mut d = vec![0.0; m_unknowns];
        for (row, i) in (1..n - 1).enumerate() {
            sub[row] = h[i - 1];
            diag[row] = 2.0 * (h[i - 1] + h[i]);
            sup[row] = h[i];
            d[row] = rhs(i);
        }
        // Fold the boundary eliminations into the first and last rows.
        diag[0] = 3.0 * h[0] + 2.0 * h[1] + h[0] * h[0] / h[1];
        sup[0] = h[1] - h[0] * h[0] / h[1];
        let hl = h[n - 2];
        let hp = h[n - 3];
        diag[m_unknowns - 1] = 3.0 * hl + 2.0 * hp + hl * hl / hp;
        sub[m_unknowns - 1] = hp - hl * hl / hp;

        // Thomas sweep.
        let mut c_star = vec![0.0; m_unknowns];
        let mut d_star = vec![0.0; m_unknowns];
        c_star[0] = sup[0] / diag[0];
        d_star[0] = d[0] / diag[0];
        for i in 1..m_unknowns {
            let denom = diag[i] - sub[i] * c_star[i - 1];
            c_star[i] = sup[i] / denom;
            d_star[i] = (d[i] - sub[i] * d_star[i - 1]) / denom;
        }
        let mut inner = vec![0.0; m_unknowns];
        inner[m_unknowns - 1] = d_star[m_unknowns - 1];
        for i in (0..m_unknowns - 1).rev() {
            inner[i] = d_star[i] - c_star[i] * inner[i + 1];
        }

        let mut moments = vec![0.0; n];
        moments[1..n - 1].copy_from_slice(&inner);
        moments[0] = moments[1] - (h[0] / h[1]) * (moments[2] - moments[1]);
        moments[n - 1] =
            moments[n - 2] + (h[n - 2] / h[n - 3]) * (moments[n - 2] - moments[n - 3]);
        Ok(CubicSpline { xs: xs.to_vec(), ys: ys.to_vec(), moments })
    }

    /// Evaluates the spline; points beyond the knot range continue the end
    /// polynomials.
    pub(crate) fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let a = self.xs[i + 1] - x;
        let b = x - self.xs[i];
        self.moments[i] * a * a * a / (6.0 * h)
            + self.moments[i + 1] * b * b * b / (6.0 * h)
            + (self.ys[i] / h - self.moments[i] * h / 6.0) * a
            + (self.ys[i + 1] / h - self.moments[i + 1] * h / 6.0) * b
    }
}

/// Smoothed likelihood table on the doubled-density grid.
#[derive(Debug, Clone)]
pub struct CalibratedLikelihood {
    refined_grid: ThetaGrid,
    outcomes: OutcomeSet,
    /// values[mu][k] on the refined grid; clipped at 0, columns renormalized.
    values: Mat,
    /// Whether outcome mu appeared anywhere in the calibration data.
    observed: Vec<bool>,
}

/// Interpolates the per-outcome frequency curves onto a grid of twice the
/// density, clips negative interpolants at zero and renormalizes every
/// refined-grid column over outcomes.
pub fn calibrate(
    freqs: &FrequencyTable,
    outcomes: &OutcomeSet,
    grid: &ThetaGrid,
) -> Result<CalibratedLikelihood> {
    let n_mu = outcomes.len();
    if freqs.values().rows() != n_mu || freqs.values().cols() != grid.len() {
        return Err(Error::GridMismatch(
            "frequency table shape differs from outcomes x grid".into(),
        ));
    }
    let support: Vec<usize> =
        (0..grid.len()).filter(|&j| freqs.defined()[j]).collect();
    if support.len() < 4 {
        return Err(Error::invalid(format!(
            "calibration needs at least 4 sampled grid columns, got {}",
            support.len()
        )));
    }
    let xs: Vec<f64> = support.iter().map(|&j| grid.point(j)).collect();
    let refined_grid = grid.refine_double();
    let refined_points = refined_grid.points();
    let mut values = Mat::zeros(n_mu, refined_grid.len());
    let mut observed = vec![false; n_mu];
    for mu in 0..n_mu {
        let ys: Vec<f64> = support.iter().map(|&j| freqs.values()[(mu, j)]).collect();
        observed[mu] = ys.iter().any(|&y| y > 0.0);
        let spline = CubicSpline::fit(&xs, &ys)?;
        for (k, &theta) in refined_points.iter().enumerate() {
            values[(mu, k)] = spline.eval(theta).max(0.0);
        }
    }
    for k in 0..refined_grid.len() {
        let total: f64 = (0..n_mu).map(|mu| values[(mu, k)]).sum();
        if total > 0.0 {
            for mu in 0..n_mu {
                values[(mu, k)] /= total;
            }
        }
    }
    Ok(CalibratedLikelihood {
        refined_grid,
        outcomes: outcomes.clone(),
        values,
        observed,
    })
}

/// Posterior plus how often the zero-likelihood floor fired.
#[derive(Debug, Clone)]
pub struct CalibrationPosterior {
    pub dist: GridDistribution,
    /// Count of (outcome, grid point) pairs that hit the 1e-12 floor.
    pub floored_points: usize,
}

/// Flat-prior Bayes product over the refined grid, in log space. Likelihood
/// zeros are floored at 1e-12 and flagged; a sequence containing an outcome
/// that was never observed at all is an error.
pub fn calibration_posterior(
    cal: &CalibratedLikelihood,
    sequence: &[usize],
) -> Result<CalibrationPosterior> {
    let n_mu = cal.outcomes.len();
    let d = cal.refined_grid.len();
    let mut counts = vec![0u64; n_mu];
    for &idx in sequence {
        if idx >= n_mu {
            return Err(Error::invalid(format!(
                "sequence outcome index {idx} outside outcome set of {n_mu}"
            )));
        }
        counts[idx] += 1;
    }
    for (mu, &n) in counts.iter().enumerate() {
        if n > 0 && !cal.observed[mu] {
            return Err(Error::UnobservedOutcome { value: cal.outcomes.value(mu) });
        }
    }
    let mut logp = vec![0.0f64; d];
    let mut floored = 0usize;
    for (mu, &n) in counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let row = cal.values.row(mu);
        for (slot, &p) in logp.iter_mut().zip(row) {
            let clipped = if p < 1e-12 {
                floored += 1;
                1e-12
            } else {
                p
            };
            *slot += n as f64 * clipped.ln();
        }
    }
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::DegeneratePosterior);
    }
    let weights: Vec<f64> = logp.iter().map(|&l| (l - max).exp()).collect();
    let dist = GridDistribution::from_unnormalized(cal.refined_grid, weights)?;
    Ok(CalibrationPosterior { dist, floored_points: floored })
}

impl CalibratedLikelihood {
    /// The doubled-density grid the posterior lives on (2d - 1 points).
    pub fn grid(&self) -> &ThetaGrid {
        &self.refined_grid
    }

    pub fn outcomes(&self) -> &OutcomeSet {
        &self.outcomes
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        write_likelihood_table(
            &mut w,
            "calibrated",
            &self.outcomes,
            &self.refined_grid,
            &self.values,
        )?;
        writeln!(w, "# observed: {}", serde_json::to_string(&self.observed).unwrap())?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut outcomes: Option<OutcomeSet> = None;
        let mut grid: Option<ThetaGrid> = None;
        let mut observed: Option<Vec<bool>> = None;
        let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
        let mut tagged = false;
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("tag:") {
                    tagged = v.trim() == "calibrated";
                } else if let Some(v) = rest.strip_prefix("outcomes:") {
                    let values: Vec<f64> = serde_json::from_str(v.trim())
                        .map_err(|e| Error::Format(format!("outcomes header: {e}")))?;
                    outcomes = Some(OutcomeSet::new(values)?);
                } else if let Some(v) = rest.strip_prefix("grid:") {
                    grid = Some(
                        serde_json::from_str(v.trim())
                            .map_err(|e| Error::Format(format!("grid header: {e}")))?,
                    );
                } else if let Some(v) = rest.strip_prefix("observed:") {
                    observed = Some(
                        serde_json::from_str(v.trim())
                            .map_err(|e| Error::Format(format!("observed header: {e}")))?,
                    );
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let theta: f64 = parts
                .next()
                .ok_or_else(|| Error::Format("empty table row".into()))?
                .parse()
                .map_err(|e| Error::Format(format!("bad theta: {e}")))?;
            let probs: Vec<f64> = parts
                .map(|t| t.parse().map_err(|e| Error::Format(format!("bad probability: {e}"))))
                .collect::<Result<_>>()?;
            rows.push((theta, probs));
        }
        if !tagged {
            return Err(Error::Format("file is not tagged `calibrated`".into()));
        }
        let outcomes = outcomes.ok_or_else(|| Error::Format("missing outcomes header".into()))?;
        let grid = grid.ok_or_else(|| Error::Format("missing grid header".into()))?;
        if rows.len() != grid.len() {
            return Err(Error::Format(format!(
                "{} rows for a grid of {} points",
                rows.len(),
                grid.len()
            )));
        }
        let mut values = Mat::zeros(outcomes.len(), grid.len());
        for (k, (_, probs)) in rows.iter().enumerate() {
            if probs.len() != outcomes.len() {
                return Err(Error::Format("row width differs from outcome count".into()));
            }
            for (mu, &p) in probs.iter().enumerate() {
                values[(mu, k)] = p;
            }
        }
        let observed = observed
            .unwrap_or_else(|| (0..outcomes.len()).map(|mu| values.row(mu).iter().any(|&p| p > 0.0)).collect());
        Ok(CalibratedLikelihood { refined_grid: grid, outcomes, values, observed })
    }
}

/// Columnar likelihood-table text: header lines, then one row per grid point
/// with `theta p(mu_0|theta) p(mu_1|theta) ...`.
pub fn write_likelihood_table<W: Write>(
    mut w: W,
    tag: &str,
    outcomes: &OutcomeSet,
    grid: &ThetaGrid,
    table: &Mat,
) -> Result<()> {
    writeln!(w, "# qbayes likelihood table v1")?;
    writeln!(w, "# tag: {tag}")?;
    writeln!(w, "# outcomes: {}", serde_json::to_string(outcomes.values()).unwrap())?;
    writeln!(w, "# grid: {}", serde_json::to_string(grid).unwrap())?;
    writeln!(w, "# columns: theta then one probability per outcome")?;
    for k in 0..grid.len() {
        write!(w, "{}", grid.point(k))?;
        for mu in 0..outcomes.len() {
            write!(w, "\t{}", table[(mu, k)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}
