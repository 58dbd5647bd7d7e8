//! Hypothesis tests built from stochastic distances.
//!
//! For ML-estimated parameter vectors from two independent samples of sizes
//! `N1`, `N2`, the scaled distance
//! `S = (2 N1 N2 / (N1 + N2)) d / (h'(0) phi''(1))` converges in distribution
//! to a chi-square law with as many degrees of freedom as there are estimated
//! parameters, which turns any of the (h, phi) distances into an asymptotic
//! test of parameter equality.

use serde::{Deserialize, Serialize};

use crate::distances::{distance, CaseSelector, DistanceKind};
use crate::special::chi2_sf;
use crate::wishart::{estimate_n, estimate_sigma, SampleSet, WishartParams};
use crate::{Error, Result};

/// How to count the degrees of freedom.
///
/// `Full` counts the `p^2` real parameters of the covariance plus the number
/// of looks (10 for `p = 3`), matching a test in which both `Sigma` and `n`
/// are estimated per sample; `SigmaOnly` drops the look count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DfMode {
    Full,
    SigmaOnly,
}

impl DfMode {
    pub fn degrees(&self, p: usize) -> u32 {
        match self {
            DfMode::Full => (p * p + 1) as u32,
            DfMode::SigmaOnly => (p * p) as u32,
        }
    }
}

/// Outcome of a two-sample test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub reject: bool,
    pub nominal_level: f64,
    pub measure: DistanceKind,
}

/// The normalizer `h'(0) phi''(1)` of the (h, phi) pair behind each measure:
/// 1 for Kullback-Leibler, `beta` for Rényi, 1/4 for Bhattacharyya and
/// Hellinger. Bartlett and revised Wishart carry no (h, phi) pedigree.
pub fn normalizer(kind: DistanceKind) -> Result<f64> {
    match kind {
        DistanceKind::Kl => Ok(1.0),
        DistanceKind::Renyi { beta } => Ok(beta),
        DistanceKind::Bhattacharyya | DistanceKind::Hellinger => Ok(0.25),
        other => Err(Error::UnsupportedKind(other.label())),
    }
}

/// `S = (2 N1 N2 / (N1 + N2)) d / normalizer`.
pub fn test_statistic(d: f64, n1: usize, n2: usize, kind: DistanceKind) -> Result<f64> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InsufficientSample {
            needed: 1,
            available: 0,
        });
    }
    if !(d >= 0.0) {
        return Err(Error::Domain(format!("distance must be nonnegative, got {d}")));
    }
    let (n1, n2) = (n1 as f64, n2 as f64);
    Ok(2.0 * n1 * n2 / (n1 + n2) * d / normalizer(kind)?)
}

/// Fits both samples by maximum likelihood, computes the requested distance
/// between the fits, scales it into the chi-square statistic, and decides.
pub fn two_sample_test(
    s1: &SampleSet,
    s2: &SampleSet,
    kind: DistanceKind,
    level: f64,
    df_mode: DfMode,
) -> Result<TestResult> {
    if s1.dim() != s2.dim() {
        return Err(Error::DimensionMismatch {
            expected: s1.dim(),
            found: s2.dim(),
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "nominal level must lie in (0, 1), got {level}"
        )));
    }
    let theta1 = fit(s1)?;
    let theta2 = fit(s2)?;
    let d = distance(kind, &theta1, &theta2, CaseSelector::Auto)?;
    // Estimation noise can leave a zero distance microscopically negative.
    let statistic = test_statistic(d.max(0.0), s1.len(), s2.len(), kind)?;
    let df = df_mode.degrees(s1.dim());
    let p_value = chi2_sf(statistic, df)?;
    Ok(TestResult {
        statistic,
        df,
        p_value,
        reject: p_value <= level,
        nominal_level: level,
        measure: kind,
    })
}

/// ML fit of one sample: mean covariance and score-root number of looks.
pub fn fit(sample: &SampleSet) -> Result<WishartParams> {
    let sigma_hat = estimate_sigma(sample)?;
    let n_hat = estimate_n(sample, &sigma_hat)?;
    WishartParams::new(sigma_hat, n_hat)
}
