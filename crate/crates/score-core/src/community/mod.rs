//! Community detection: a seeded k-means, the ratio-based spectral
//! clustering pipeline and its ablations, the extra-eigenvector and
//! shifted-ranking variants, the directed (SVD) variant, and
//! permutation-minimized error counting.

mod kmeans;
mod metrics;
mod pipeline;

pub use kmeans::kmeans;
pub use metrics::hamming_error;
pub use pipeline::{
    dscore, score_plus, score_star, spectral_cluster, spectral_cluster_matrix, MethodConfig,
    PostPca, PrePca,
};

use crate::spectra::SpectraError;
use ndarray::Array2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("k-means needs at least k points, got {n} points for k = {k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("cluster count must be at least 1")]
    ZeroClusters,
    #[error("graph has {0} connected components; cluster the giant component (giant_component) or connect the graph first")]
    Disconnected(usize),
    #[error("ratio embedding needs k >= 2, got k = {0}")]
    RatioNeedsTwo(usize),
    #[error("dscore needs a directed graph; for undirected graphs use spectral_cluster")]
    NotDirected,
    #[error("invalid method config: {0}")]
    BadConfig(String),
    #[error("label vectors have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("label value {value} is too large for {n} points")]
    LabelOutOfRange { value: usize, n: usize },
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// A hard clustering plus the k-means objective it achieved.
#[derive(Debug, Clone)]
pub struct ClusterResult {
    /// Cluster label per node, each in `[0, k)`.
    pub labels: Vec<usize>,
    /// Cluster centers in the embedding space (`k x d`).
    pub centers: Array2<f64>,
    /// Sum of squared distances from each point to its assigned center.
    pub inertia: f64,
    /// Whether the extra-eigenvector rule fired (set only by [`score_plus`]
    /// or configs with `extra_eigenvector_rule`).
    pub used_extra_eigenvector: Option<bool>,
    /// Node counts outside the left/right leading-singular-vector supports
    /// (set only by [`dscore`]).
    pub off_support: Option<(usize, usize)>,
}

impl ClusterResult {
    /// Number of clusters.
    pub fn k(&self) -> usize {
        self.centers.nrows()
    }
}
