//! The relaxed scaled complex Wishart model: log-density, maximum-likelihood
//! estimation of the covariance and of the equivalent number of looks, and
//! the analytic expectations used by the distance derivations.

use num_complex::Complex64;

use crate::hermitian::{trace_product, HermitianPD};
use crate::special::{digamma, ln_multivariate_gamma};
use crate::{Error, Result};

/// Parameter pair `(Sigma, n)` of the relaxed model `W_R(Sigma, n)`.
///
/// The relaxed model drops the integrality of the look count but the density
/// still needs every `Gamma(n - i)`, `i < p`, so `n > p - 1` is enforced at
/// construction.
#[derive(Debug, Clone)]
pub struct WishartParams {
    sigma: HermitianPD,
    n: f64,
}

impl WishartParams {
    pub fn new(sigma: HermitianPD, n: f64) -> Result<Self> {
        let p = sigma.dim() as f64;
        if !n.is_finite() || !(n > p - 1.0) {
            return Err(Error::Domain(format!(
                "number of looks must satisfy n > p - 1 = {}, got {n}",
                p - 1.0
            )));
        }
        Ok(WishartParams { sigma, n })
    }

    pub fn sigma(&self) -> &HermitianPD {
        &self.sigma
    }

    pub fn looks(&self) -> f64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }
}

/// An ordered collection of observed covariance matrices from one region.
#[derive(Debug, Clone)]
pub struct SampleSet {
    p: usize,
    matrices: Vec<HermitianPD>,
}

impl SampleSet {
    pub fn new(matrices: Vec<HermitianPD>) -> Result<Self> {
        let p = match matrices.first() {
            Some(m) => m.dim(),
            None => return Err(Error::EmptySample),
        };
        for m in &matrices {
            if m.dim() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: m.dim(),
                });
            }
        }
        Ok(SampleSet { p, matrices })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[HermitianPD] {
        &self.matrices
    }

    pub fn get(&self, i: usize) -> &HermitianPD {
        &self.matrices[i]
    }
}

/// Log of the relaxed scaled complex Wishart density at `Z`:
/// `p n log n + (n - p) log|Z| - n log|Sigma| - log Gamma_p(n) - n tr(Sigma^{-1} Z)`.
pub fn log_density(z: &HermitianPD, theta: &WishartParams) -> Result<f64> {
    let p = theta.dim();
    if z.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: z.dim(),
        });
    }
    let n = theta.looks();
    let pf = p as f64;
    let tr = trace_product(&theta.sigma().inverse()?, z)?.re;
    Ok(pf * n * n.ln() + (n - pf) * z.logdet()? - n * theta.sigma().logdet()?
        - ln_multivariate_gamma(n, p)?
        - n * tr)
}

/// ML estimator of the covariance: the entrywise sample mean, re-validated.
pub fn estimate_sigma(sample: &SampleSet) -> Result<HermitianPD> {
    let p = sample.dim();
    let n = sample.len() as f64;
    let mut acc = vec![Complex64::ZERO; p * p];
    for m in sample.matrices() {
        for i in 0..p {
            for j in 0..p {
                acc[i * p + j] += m.get(i, j);
            }
        }
    }
    let rows: Vec<Vec<Complex64>> = (0..p)
        .map(|i| (0..p).map(|j| acc[i * p + j] / n).collect())
        .collect();
    HermitianPD::validate(&rows)
}

/// Sufficient statistics of the profile score in `n`: the sample means of
/// `log|Z_i|` and of `tr(Sigma_hat^{-1} Z_i)`, which do not depend on `n`.
struct ScoreStats {
    p: usize,
    mean_logdet: f64,
    logdet_sigma: f64,
    mean_trace: f64,
}

impl ScoreStats {
    fn compute(sample: &SampleSet, sigma_hat: &HermitianPD) -> Result<Self> {
        let p = sample.dim();
        if sigma_hat.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: sigma_hat.dim(),
            });
        }
        let inv = sigma_hat.inverse()?;
        let mut mean_logdet = 0.0;
        let mut mean_trace = 0.0;
        for m in sample.matrices() {
            mean_logdet += m.logdet()?;
            mean_trace += trace_product(&inv, m)?.re;
        }
        let count = sample.len() as f64;
        Ok(ScoreStats {
            p,
            mean_logdet: mean_logdet / count,
            logdet_sigma: sigma_hat.logdet()?,
            mean_trace: mean_trace / count,
        })
    }

    /// `p [log n + 1] + mean log|Z| - log|Sigma_hat| - mean tr(Sigma_hat^{-1} Z)
    ///  - sum_{i=0}^{p-1} psi(n - i)`
    fn eval(&self, n: f64) -> Result<f64> {
        let pf = self.p as f64;
        if !(n > pf - 1.0) {
            return Err(Error::Domain(format!(
                "score is defined for n > p - 1 = {}, got {n}",
                pf - 1.0
            )));
        }
        let mut psi_sum = 0.0;
        for i in 0..self.p {
            psi_sum += digamma(n - i as f64)?;
        }
        Ok(pf * (n.ln() + 1.0) + self.mean_logdet - self.logdet_sigma - self.mean_trace - psi_sum)
    }
}

/// Sample-averaged profile score for the number of looks, evaluated at `n`.
pub fn score_n(sample: &SampleSet, sigma_hat: &HermitianPD, n: f64) -> Result<f64> {
    ScoreStats::compute(sample, sigma_hat)?.eval(n)
}

/// Bisection bracket for [`estimate_n`].
const N_BRACKET_LO_OFFSET: f64 = 1e-6;
const N_BRACKET_HI: f64 = 1e4;
const N_TOLERANCE: f64 = 1e-8;

/// ML estimator of the equivalent number of looks: the root of the profile
/// score, located by bisection on `[p - 1 + 1e-6, 1e4]`.
///
/// The score is strictly decreasing in `n`, so a sign change brackets the
/// unique root; when the score does not change sign over the bracket the
/// condition is reported as [`Error::NoRootInBracket`] rather than clamped.
pub fn estimate_n(sample: &SampleSet, sigma_hat: &HermitianPD) -> Result<f64> {
    let stats = ScoreStats::compute(sample, sigma_hat)?;
    let mut lo = sample.dim() as f64 - 1.0 + N_BRACKET_LO_OFFSET;
    let mut hi = N_BRACKET_HI;
    let score_lo = stats.eval(lo)?;
    let score_hi = stats.eval(hi)?;
    if score_lo.signum() == score_hi.signum() {
        return Err(Error::NoRootInBracket {
            lo,
            hi,
            score_lo,
            score_hi,
        });
    }
    // score_lo > 0 > score_hi for a decreasing score
    while hi - lo > N_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let s = stats.eval(mid)?;
        if s.signum() == score_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `E[log |Z|] = log|Sigma| + sum_{k=0}^{p-1} psi(n - k) - p log n`.
pub fn expected_logdet(theta: &WishartParams) -> Result<f64> {
    let p = theta.dim();
    let n = theta.looks();
    let mut psi_sum = 0.0;
    for k in 0..p {
        psi_sum += digamma(n - k as f64)?;
    }
    Ok(theta.sigma().logdet()? + psi_sum - p as f64 * n.ln())
}

/// `E[tr(Sigma_j^{-1} Z_i)] = tr(Sigma_j^{-1} Sigma_i)`; equals `p` when the
/// two covariances coincide.
pub fn expected_trace(theta_i: &WishartParams, sigma_j: &HermitianPD) -> Result<f64> {
    Ok(trace_product(&sigma_j.inverse()?, theta_i.sigma())?.re)
}
