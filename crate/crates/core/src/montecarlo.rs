//! Monte Carlo studies of the distance-based tests: empirical size under the
//! null, empirical power against a scaled alternative, exact-parameter
//! sensitivity curves, and block splitting of observed samples.
//!
//! Replica `r` of cell `c` draws from the substream
//! `SeededRng::stream_for(c, r)`, so every cell is independently reproducible
//! and the tables do not depend on how replicas are scheduled across threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::{distance, CaseSelector, DistanceKind};
use crate::hermitian::HermitianPD;
use crate::hypothesis::{fit, normalizer, test_statistic, DfMode};
use crate::sampler::{sample_wishart_relaxed, SeededRng};
use crate::special::chi2_sf;
use crate::wishart::{SampleSet, WishartParams};
use crate::{Error, Result};

/// Configuration of a size or power experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Common covariance of the simulated populations.
    pub sigma: HermitianPD,
    /// Equivalent numbers of looks to sweep.
    pub n_values: Vec<f64>,
    /// `(N1, N2)` sample-size pairs to sweep.
    pub sample_sizes: Vec<(usize, usize)>,
    /// Monte Carlo replicas per cell.
    pub replicas: usize,
    /// Nominal levels at which rejection is counted.
    pub nominal_levels: Vec<f64>,
    /// Measures to evaluate on each replica's fitted parameters.
    pub measures: Vec<DistanceKind>,
    /// Base seed; each replica derives its own substream.
    pub seed: u64,
    /// Covariance scaling of the alternative population (power experiments).
    pub scale_factor: f64,
}

impl ExperimentConfig {
    fn check(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::Domain("at least one replica is required".into()));
        }
        if self.n_values.is_empty() || self.sample_sizes.is_empty() {
            return Err(Error::Domain("empty factor grid".into()));
        }
        for &l in &self.nominal_levels {
            if !(l > 0.0 && l < 1.0) {
                return Err(Error::Domain(format!("nominal level {l} outside (0,1)")));
            }
        }
        if !(self.scale_factor > 0.0) {
            return Err(Error::Domain("scale factor must be positive".into()));
        }
        for m in &self.measures {
            normalizer(*m)?;
        }
        let p = self.sigma.dim() as f64;
        for &n in &self.n_values {
            if !(n > p - 1.0) {
                return Err(Error::Domain(format!("looks {n} must exceed p - 1")));
            }
        }
        Ok(())
    }
}

/// One row of the empirical-size table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizeRow {
    pub measure: String,
    pub n: f64,
    pub n1: usize,
    pub n2: usize,
    pub level: f64,
    /// Fraction of replicas rejected at `level`.
    pub size: f64,
    /// Mean of the statistic across replicas.
    pub mean_s: f64,
    /// Coefficient of variation of the statistic, in percent.
    pub cv_s: f64,
}

/// One row of the empirical-power table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerRow {
    pub measure: String,
    pub n_per_sample: usize,
    pub power: f64,
}

/// Statistics of all configured measures for one replica, in measure order.
fn replica_statistics(
    sigma1: &HermitianPD,
    sigma2: &HermitianPD,
    n: f64,
    n1: usize,
    n2: usize,
    measures: &[DistanceKind],
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let theta1 = WishartParams::new(sigma1.clone(), n)?;
    let theta2 = WishartParams::new(sigma2.clone(), n)?;
    let draw = |theta: &WishartParams, count: usize, rng: &mut SeededRng| -> Result<SampleSet> {
        let ms = (0..count)
            .map(|_| sample_wishart_relaxed(theta, rng))
            .collect::<Result<Vec<_>>>()?;
        SampleSet::new(ms)
    };
    let s1 = draw(&theta1, n1, rng)?;
    let s2 = draw(&theta2, n2, rng)?;
    let fit1 = fit(&s1)?;
    let fit2 = fit(&s2)?;
    measures
        .iter()
        .map(|&kind| {
            let d = distance(kind, &fit1, &fit2, CaseSelector::Auto)?;
            test_statistic(d.max(0.0), n1, n2, kind)
        })
        .collect()
}

/// Runs all replicas of one cell in parallel; the returned statistics are
/// ordered `[replica][measure]` regardless of scheduling.
fn run_cell(
    cell_index: u64,
    sigma1: &HermitianPD,
    sigma2: &HermitianPD,
    n: f64,
    n1: usize,
    n2: usize,
    cfg: &ExperimentConfig,
) -> Result<Vec<Vec<f64>>> {
    (0..cfg.replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = SeededRng::new(cfg.seed, SeededRng::stream_for(cell_index, r as u64));
            replica_statistics(sigma1, sigma2, n, n1, n2, &cfg.measures, &mut rng)
        })
        .collect()
}

fn summarize(stats: &[f64]) -> (f64, f64) {
    let t = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / t;
    let var = if stats.len() > 1 {
        stats.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    let cv = if mean != 0.0 {
        100.0 * var.sqrt() / mean
    } else {
        0.0
    };
    (mean, cv)
}

/// Empirical test size: both samples of every replica come from the same
/// `W_R(sigma, n)` population, and the rejection fraction `R/T` is reported
/// per measure, cell, and nominal level, together with the mean statistic
/// and its coefficient of variation.
pub fn empirical_size(cfg: &ExperimentConfig) -> Result<Vec<SizeRow>> {
    cfg.check()?;
    let df = DfMode::Full.degrees(cfg.sigma.dim());
    let mut rows = Vec::new();
    let mut cell_index = 0u64;
    for &n in &cfg.n_values {
        for &(n1, n2) in &cfg.sample_sizes {
            let stats = run_cell(cell_index, &cfg.sigma, &cfg.sigma, n, n1, n2, cfg)?;
            for (mi, measure) in cfg.measures.iter().enumerate() {
                let per_measure: Vec<f64> = stats.iter().map(|row| row[mi]).collect();
                let (mean_s, cv_s) = summarize(&per_measure);
                for &level in &cfg.nominal_levels {
                    let rejected = per_measure
                        .iter()
                        .filter(|&&s| chi2_sf(s, df).map(|p| p <= level).unwrap_or(false))
                        .count();
                    rows.push(SizeRow {
                        measure: measure.label(),
                        n,
                        n1,
                        n2,
                        level,
                        size: rejected as f64 / cfg.replicas as f64,
                        mean_s,
                        cv_s,
                    });
                }
            }
            cell_index += 1;
        }
    }
    Ok(rows)
}

/// Empirical test power: sample one population from `W_R(sigma, n)` and the
/// other from `W_R(scale_factor * sigma, n)`, rejecting at the first
/// configured nominal level. Uses the first entry of `n_values` and square
/// sample sizes from `sample_sizes`.
pub fn empirical_power(cfg: &ExperimentConfig) -> Result<Vec<PowerRow>> {
    cfg.check()?;
    let n = cfg.n_values[0];
    let level = cfg.nominal_levels[0];
    let df = DfMode::Full.degrees(cfg.sigma.dim());
    let scaled = cfg.sigma.scale(cfg.scale_factor)?;
    let mut rows = Vec::new();
    for (ci, &(n1, n2)) in cfg.sample_sizes.iter().enumerate() {
        let stats = run_cell(ci as u64, &cfg.sigma, &scaled, n, n1, n2, cfg)?;
        for (mi, measure) in cfg.measures.iter().enumerate() {
            let rejected = stats
                .iter()
                .filter(|row| chi2_sf(row[mi], df).map(|p| p <= level).unwrap_or(false))
                .count();
            rows.push(PowerRow {
                measure: measure.label(),
                n_per_sample: n1,
                power: rejected as f64 / cfg.replicas as f64,
            });
        }
    }
    Ok(rows)
}

/// What the sensitivity sweep varies.
#[derive(Debug, Clone)]
pub enum SensitivityVary {
    /// Replace the `(0, 0)` entry of the fixed covariance by each grid value.
    SigmaEntry { grid: Vec<f64> },
    /// Replace the number of looks by each grid value.
    Looks { grid: Vec<f64> },
}

/// One grid point of a sensitivity sweep: either the statistics of every
/// requested measure, or the validation error that excluded the point.
#[derive(Debug)]
pub struct SensitivityPoint {
    pub value: f64,
    pub statistics: Result<Vec<f64>>,
}

/// Exact-parameter sensitivity curves: the test statistic evaluated directly
/// from parameters (no sampling), with the `N1 = N2 = N` prefactor, per
/// measure and grid point. Grid points that leave the valid domain are
/// reported in place rather than aborting the sweep.
pub fn sensitivity_curve(
    fixed: &WishartParams,
    vary: &SensitivityVary,
    n_per_sample: usize,
    measures: &[DistanceKind],
) -> Result<Vec<SensitivityPoint>> {
    for m in measures {
        normalizer(*m)?;
    }
    if n_per_sample == 0 {
        return Err(Error::InsufficientSample {
            needed: 1,
            available: 0,
        });
    }
    let eval = |theta2: Result<WishartParams>, value: f64| -> SensitivityPoint {
        let statistics = theta2.and_then(|t2| {
            measures
                .iter()
                .map(|&kind| {
                    let d = distance(kind, fixed, &t2, CaseSelector::Auto)?;
                    test_statistic(d.max(0.0), n_per_sample, n_per_sample, kind)
                })
                .collect()
        });
        SensitivityPoint { value, statistics }
    };
    let points = match vary {
        SensitivityVary::SigmaEntry { grid } => grid
            .iter()
            .map(|&x| {
                let theta2 = replace_leading_entry(fixed.sigma(), x)
                    .and_then(|s| WishartParams::new(s, fixed.looks()));
                eval(theta2, x)
            })
            .collect(),
        SensitivityVary::Looks { grid } => grid
            .iter()
            .map(|&m| {
                let theta2 = WishartParams::new(fixed.sigma().clone(), m);
                eval(theta2, m)
            })
            .collect(),
    };
    Ok(points)
}

fn replace_leading_entry(sigma: &HermitianPD, x: f64) -> Result<HermitianPD> {
    let mut rows = sigma.rows();
    rows[0][0] = num_complex::Complex64::new(x, 0.0);
    HermitianPD::validate(&rows)
}

/// Disjoint block pairs of an observed sample, following the three-step
/// splitting procedure: cut the sample into consecutive blocks of size `n1`;
/// for each such block, cut the remainder of the sample into consecutive
/// blocks of size `n2`; emit every (first-level, second-level) pair in order.
pub fn split_blocks(
    sample: &SampleSet,
    n1: usize,
    n2: usize,
) -> Result<Vec<(SampleSet, SampleSet)>> {
    let total = sample.len();
    if n1 == 0 || n2 == 0 {
        return Err(Error::InsufficientSample {
            needed: 1,
            available: 0,
        });
    }
    if n1 + n2 > total {
        return Err(Error::InsufficientSample {
            needed: n1 + n2,
            available: total,
        });
    }
    let firsts = total / n1;
    let mut pairs = Vec::new();
    for b in 0..firsts {
        let lo = b * n1;
        let hi = lo + n1;
        let first: Vec<_> = sample.matrices()[lo..hi].to_vec();
        let rest: Vec<_> = sample
            .matrices()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i < lo || *i >= hi)
            .map(|(_, m)| m.clone())
            .collect();
        for c in 0..rest.len() / n2 {
            let second = rest[c * n2..(c + 1) * n2].to_vec();
            pairs.push((SampleSet::new(first.clone())?, SampleSet::new(second)?));
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::paper_sigma;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            sigma: paper_sigma(360_932.0),
            n_values: vec![8.0],
            sample_sizes: vec![(32, 32)],
            replicas: 24,
            nominal_levels: vec![0.05],
            measures: vec![DistanceKind::Kl, DistanceKind::Hellinger],
            seed: 99,
            scale_factor: 1.2,
        }
    }

    #[test]
    fn size_experiment_reproducible_and_shaped() {
        let cfg = small_config();
        let a = empirical_size(&cfg).unwrap();
        let b = empirical_size(&cfg).unwrap();
        assert_eq!(a.len(), 2); // 2 measures x 1 cell x 1 level
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.size, y.size);
            assert_eq!(x.mean_s, y.mean_s);
            assert_eq!(x.cv_s, y.cv_s);
        }
        for row in &a {
            assert!((0.0..=1.0).contains(&row.size));
            assert!(row.mean_s > 0.0);
        }
    }

    #[test]
    fn serial_equals_parallel() {
        let cfg = small_config();
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| empirical_size(&cfg)).unwrap();
        let b = pool4.install(|| empirical_size(&cfg)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.size, y.size);
            assert!((x.mean_s - y.mean_s).abs() == 0.0);
        }
    }

    #[test]
    fn degenerate_single_replica_size_is_zero_or_one() {
        let mut cfg = small_config();
        cfg.replicas = 1;
        let rows = empirical_size(&cfg).unwrap();
        for row in rows {
            assert!(row.size == 0.0 || row.size == 1.0);
        }
    }

    #[test]
    fn power_with_unit_scale_recovers_size() {
        let mut cfg = small_config();
        cfg.scale_factor = 1.0;
        cfg.n_values = vec![4.0];
        cfg.sample_sizes = vec![(49, 49)];
        cfg.replicas = 200;
        let rows = empirical_power(&cfg).unwrap();
        for row in rows {
            assert!(row.power < 0.15, "null power {} too high", row.power);
        }
    }

    #[test]
    fn sensitivity_zero_at_null_point() {
        let fixed = WishartParams::new(paper_sigma(360_932.0), 8.0).unwrap();
        let measures = [
            DistanceKind::Kl,
            DistanceKind::Renyi { beta: 0.9 },
            DistanceKind::Bhattacharyya,
            DistanceKind::Hellinger,
        ];
        let pts = sensitivity_curve(
            &fixed,
            &SensitivityVary::SigmaEntry {
                grid: vec![360_932.0],
            },
            100,
            &measures,
        )
        .unwrap();
        for s in pts[0].statistics.as_ref().unwrap() {
            assert!(s.abs() <= 1e-9);
        }
        let pts = sensitivity_curve(
            &fixed,
            &SensitivityVary::Looks { grid: vec![8.0] },
            100,
            &measures,
        )
        .unwrap();
        for s in pts[0].statistics.as_ref().unwrap() {
            assert!(s.abs() <= 1e-9);
        }
    }

    #[test]
    fn sensitivity_reports_domain_failures_per_point() {
        let fixed = WishartParams::new(paper_sigma(360_932.0), 8.0).unwrap();
        let pts = sensitivity_curve(
            &fixed,
            &SensitivityVary::Looks {
                grid: vec![1.0, 8.0],
            },
            100,
            &[DistanceKind::Kl],
        )
        .unwrap();
        assert!(pts[0].statistics.is_err());
        assert!(pts[1].statistics.is_ok());
    }

    #[test]
    fn split_blocks_enumeration() {
        let pixel = crate::HermitianPD::identity(1);
        let sample = SampleSet::new(vec![pixel.clone(); 100]).unwrap();
        let pairs = split_blocks(&sample, 50, 50).unwrap();
        assert_eq!(pairs.len(), 2);

        let sample = SampleSet::new(vec![pixel.clone(); 147]).unwrap();
        let pairs = split_blocks(&sample, 49, 49).unwrap();
        assert_eq!(pairs.len(), 6);
        for (a, b) in &pairs {
            assert_eq!(a.len(), 49);
            assert_eq!(b.len(), 49);
        }

        let sample = SampleSet::new(vec![pixel; 80]).unwrap();
        assert!(matches!(
            split_blocks(&sample, 49, 49),
            Err(Error::InsufficientSample { .. })
        ));
    }
}
