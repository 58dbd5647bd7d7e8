//! Stochastic distances between relaxed scaled complex Wishart distributions.
//!
//! Multilook polarimetric SAR data is commonly modeled by the scaled complex
//! Wishart law `W(Σ, L)`; relaxing the integrality of the number of looks
//! gives the relaxed model `W_R(Σ, n)` with a real shape parameter `n > p - 1`.
//! This crate provides, for that model:
//!
//! - closed-form Kullback-Leibler, Rényi-β, Bhattacharyya, and Hellinger
//!   distances between two parameter pairs `(Σ, n)`, in the general form and
//!   in the equal-looks / equal-covariance special cases ([`distances`]),
//!   plus the Bartlett and revised Wishart covariance contrasts;
//! - asymptotic chi-square hypothesis tests built from those distances
//!   ([`hypothesis`]);
//! - maximum-likelihood estimation of `Σ` and `n` ([`wishart`]);
//! - a deterministic, substream-seeded Wishart sampler ([`sampler`]);
//! - Monte Carlo size/power/sensitivity experiments ([`montecarlo`]);
//! - k-means clustering of covariance imagery driven by any of the distances
//!   ([`clustering`]);
//! - file formats for matrices, parameter sets, sample sets, and covariance
//!   images ([`io`]).
//!
//! Everything that multiplies gammas, powers, or determinants is carried in
//! the log domain; the only exponentiations happen at the very end of a
//! distance or p-value evaluation.

#![forbid(unsafe_code)]

use thiserror::Error;

pub mod clustering;
pub mod distances;
pub mod hermitian;
pub mod hypothesis;
pub mod io;
pub mod montecarlo;
pub mod sampler;
pub mod special;
pub mod testkit;
pub mod wishart;

pub use clustering::{ClusterState, CovarianceImage, InitMethod};
pub use distances::{CaseSelector, DistanceKind, InequalityReport};
pub use hermitian::{CholeskyFactor, HermitianPD};
pub use hypothesis::{DfMode, TestResult};
pub use montecarlo::{ExperimentConfig, SensitivityVary};
pub use sampler::SeededRng;
pub use wishart::{SampleSet, WishartParams};

pub use num_complex::Complex64;

/// Errors shared by the numerical layers of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entry ({row},{col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is not Hermitian: entry ({row},{col}) does not match the conjugate of ({col},{row})")]
    NotHermitian { row: usize, col: usize },

    #[error("matrix is not positive definite: Cholesky failed at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "no root in bracket [{lo}, {hi}]: score is {score_lo:.6e} at the lower end and {score_hi:.6e} at the upper end"
    )]
    NoRootInBracket {
        lo: f64,
        hi: f64,
        score_lo: f64,
        score_hi: f64,
    },

    #[error("measure {0} has no (h,phi) normalizer and cannot be used in a test")]
    UnsupportedKind(String),

    #[error("insufficient sample: need {needed} observations, have {available}")]
    InsufficientSample { needed: usize, available: usize },

    #[error("sample set is empty")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;
