//! JSON schema of the experiment config document.

use serde::Deserialize;

use sardist::distances::DistanceKind;
use sardist::io::MatrixDoc;
use sardist::montecarlo::ExperimentConfig;

/// On-disk form of [`ExperimentConfig`].
///
/// Measures are written either as bare kind names (`"kl"`,
/// `"bhattacharyya"`, `"hellinger"`) or, for Rényi, as
/// `{"renyi": {"beta": 0.9}}`.
#[derive(Debug, Deserialize)]
pub struct ExperimentConfigDoc {
    pub sigma: MatrixDoc,
    pub n_values: Vec<f64>,
    pub sample_sizes: Vec<(usize, usize)>,
    pub replicas: usize,
    pub nominal_levels: Vec<f64>,
    pub measures: Vec<DistanceKind>,
    pub seed: u64,
    #[serde(default = "default_scale")]
    pub scale_factor: f64,
}

fn default_scale() -> f64 {
    1.2
}

impl ExperimentConfigDoc {
    pub fn into_config(self) -> anyhow::Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            sigma: self.sigma.into_matrix()?,
            n_values: self.n_values,
            sample_sizes: self.sample_sizes,
            replicas: self.replicas,
            nominal_levels: self.nominal_levels,
            measures: self.measures,
            seed: self.seed,
            scale_factor: self.scale_factor,
        })
    }
}
