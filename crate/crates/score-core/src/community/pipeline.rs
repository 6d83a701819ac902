//! The spectral clustering pipeline: optional degree normalization, top-k
//! eigenpairs (optionally shift-ranked, optionally one extra vector), an
//! embedding (ratios, raw rows, or normalized rows), then seeded k-means.

use super::{kmeans, ClusterError, ClusterResult};
use crate::netcore::Graph;
use crate::spectra::{
    eigs_sym, eigs_sym_shifted, pre_pca_normalize_dense, ratio_normalize_columns,
    scoreq_normalize_columns, svd_top, EigenPairs, PrePcaMode, ThresholdRule,
};
use ndarray::{s, Array2, ArrayView2};

const KMEANS_RESTARTS: usize = 10;

/// Adjacency preprocessing applied before the eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrePca {
    #[default]
    None,
    LaplacianMean {
        delta: f64,
    },
    LaplacianMax {
        delta: f64,
    },
    Glm {
        delta: f64,
    },
}

/// Embedding built from the eigenvector columns before k-means.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostPca {
    /// Entrywise ratios of trailing columns to the leading one, clipped.
    Score { threshold: ThresholdRule },
    /// Raw eigenvector rows.
    None,
    /// Rows normalized by their own lq norm.
    ScoreQ { q: f64 },
}

/// Everything that distinguishes the clustering variants from one another.
///
/// The named constructors cover the standard combinations; arbitrary mixes
/// deserialize from a JSON blob for the CLI.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MethodConfig {
    #[serde(default)]
    pub pre_pca: PrePca,
    #[serde(default = "default_post_pca")]
    pub post_pca: PostPca,
    /// Scale each eigenvector by its eigenvalue before embedding.
    #[serde(default)]
    pub weight_by_eigenvalue: bool,
    /// Compute one extra eigenpair and keep it when the relative gap
    /// `(l_k - l_{k+1}) / l_k` is at most this threshold. Zero disables the
    /// rule. Requires `weight_by_eigenvalue`.
    #[serde(default)]
    pub extra_eigenvector_rule: Option<f64>,
    /// Rank eigenpairs by `|lambda + c0|` instead of `|lambda|`.
    #[serde(default)]
    pub eigen_shift: Option<f64>,
}

fn default_post_pca() -> PostPca {
    PostPca::Score {
        threshold: ThresholdRule::Auto,
    }
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self::score()
    }
}

impl MethodConfig {
    /// Ratios on the raw adjacency.
    pub fn score() -> Self {
        MethodConfig {
            pre_pca: PrePca::None,
            post_pca: default_post_pca(),
            weight_by_eigenvalue: false,
            extra_eigenvector_rule: None,
            eigen_shift: None,
        }
    }

    /// Ordinary spectral clustering: k-means on raw eigenvector rows.
    pub fn osc() -> Self {
        MethodConfig {
            post_pca: PostPca::None,
            ..Self::score()
        }
    }

    /// Ratios on the degree-normalized adjacency with zero ridge.
    pub fn rsc() -> Self {
        MethodConfig {
            pre_pca: PrePca::LaplacianMean { delta: 0.0 },
            ..Self::score()
        }
    }

    /// Classical normalized-Laplacian spectral clustering.
    pub fn laplacian(delta: f64) -> Self {
        MethodConfig {
            pre_pca: PrePca::LaplacianMean { delta },
            post_pca: PostPca::None,
            ..Self::score()
        }
    }

    /// Spectral clustering on the doubly degree-inverted adjacency.
    pub fn glm(delta: f64) -> Self {
        MethodConfig {
            pre_pca: PrePca::Glm { delta },
            post_pca: PostPca::None,
            ..Self::score()
        }
    }

    /// k-means on lq-normalized eigenvector rows.
    pub fn score_q(q: f64) -> Self {
        MethodConfig {
            post_pca: PostPca::ScoreQ { q },
            ..Self::score()
        }
    }

    fn validate(&self) -> Result<(), ClusterError> {
        if let Some(t) = self.extra_eigenvector_rule {
            if !self.weight_by_eigenvalue {
                return Err(ClusterError::BadConfig(
                    "extra_eigenvector_rule requires weight_by_eigenvalue".into(),
                ));
            }
            if !(t >= 0.0 && t.is_finite()) {
                return Err(ClusterError::BadConfig(format!(
                    "extra-eigenvector threshold must be finite and nonnegative, got {t}"
                )));
            }
        }
        if let Some(c0) = self.eigen_shift {
            if !c0.is_finite() {
                return Err(ClusterError::BadConfig(format!(
                    "eigen shift must be finite, got {c0}"
                )));
            }
        }
        Ok(())
    }
}

/// Cluster the nodes of a connected graph into `k` communities.
pub fn spectral_cluster(
    g: &Graph,
    k: usize,
    cfg: &MethodConfig,
    seed: u64,
) -> Result<ClusterResult, ClusterError> {
    let comps = g.components().len();
    if comps != 1 {
        return Err(ClusterError::Disconnected(comps));
    }
    spectral_cluster_matrix(&g.adjacency().view(), k, cfg, seed)
}

/// Same pipeline on a dense symmetric matrix in place of the observed
/// adjacency; this is the oracle path (expected adjacency in, no sampling
/// noise).
pub fn spectral_cluster_matrix(
    a: &ArrayView2<f64>,
    k: usize,
    cfg: &MethodConfig,
    seed: u64,
) -> Result<ClusterResult, ClusterError> {
    cfg.validate()?;
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if matches!(cfg.post_pca, PostPca::Score { .. }) && k < 2 {
        return Err(ClusterError::RatioNeedsTwo(k));
    }
    let m = match cfg.pre_pca {
        PrePca::None => a.to_owned(),
        PrePca::LaplacianMean { delta } => {
            pre_pca_normalize_dense(a, PrePcaMode::LaplacianMean, delta)?
        }
        PrePca::LaplacianMax { delta } => {
            pre_pca_normalize_dense(a, PrePcaMode::LaplacianMax, delta)?
        }
        PrePca::Glm { delta } => pre_pca_normalize_dense(a, PrePcaMode::Glm, delta)?,
    };
    let want = k + usize::from(cfg.extra_eigenvector_rule.is_some());
    let eig = match cfg.eigen_shift {
        Some(c0) => eigs_sym_shifted(&m.view(), want, c0)?,
        None => eigs_sym(&m.view(), want)?,
    };
    cluster_from_eigen(&eig, k, cfg, seed)
}

/// Run the post-eigen half of the pipeline. Split out so the eigenvector
/// sign-flip invariance can be exercised directly.
pub(crate) fn cluster_from_eigen(
    eig: &EigenPairs,
    k: usize,
    cfg: &MethodConfig,
    seed: u64,
) -> Result<ClusterResult, ClusterError> {
    let mut used_extra = None;
    let mut m_use = k;
    if let Some(t) = cfg.extra_eigenvector_rule {
        let fired = if eig.pair_count() == k + 1 && t > 0.0 {
            let lk = eig.values[k - 1];
            let lk1 = eig.values[k];
            lk != 0.0 && (lk - lk1) / lk <= t
        } else {
            false
        };
        used_extra = Some(fired);
        m_use = k + usize::from(fired);
    }
    let mut cols: Array2<f64> = eig.vectors.slice(s![.., 0..m_use]).to_owned();
    if cfg.weight_by_eigenvalue {
        for (m, mut col) in cols.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|x| x * eig.values[m]);
        }
    }
    let embedding = match cfg.post_pca {
        PostPca::Score { threshold } => ratio_normalize_columns(&cols.view(), threshold)?.r,
        PostPca::None => cols,
        PostPca::ScoreQ { q } => scoreq_normalize_columns(&cols.view(), q)?,
    };
    let mut res = kmeans(&embedding.view(), k, seed, KMEANS_RESTARTS)?;
    res.used_extra_eigenvector = used_extra;
    Ok(res)
}

/// Degree-normalized clustering that spends one extra eigenvector when the
/// spectral gap after the k-th eigenvalue is weak.
///
/// `t` is the relative-gap threshold (0.1 is the standard choice; 0 disables
/// the extra vector) and `delta` the ridge on the max-degree normalization
/// (0.05 standard). Eigenvectors are weighted by their eigenvalues before the
/// ratio step, and k-means still looks for `k` clusters either way. The
/// result records whether the extra vector was used.
pub fn score_plus(
    g: &Graph,
    k: usize,
    t: f64,
    delta: f64,
    seed: u64,
) -> Result<ClusterResult, ClusterError> {
    let cfg = MethodConfig {
        pre_pca: PrePca::LaplacianMax { delta },
        weight_by_eigenvalue: true,
        extra_eigenvector_rule: Some(t),
        ..MethodConfig::score()
    };
    spectral_cluster(g, k, &cfg, seed)
}

/// Ratio clustering with eigenpairs ranked by `|lambda + c0|`, demoting
/// negative eigenvalues for positive `c0`. With `c0 = 0` this is exactly the
/// plain pipeline.
pub fn score_star(g: &Graph, k: usize, c0: f64, seed: u64) -> Result<ClusterResult, ClusterError> {
    let cfg = MethodConfig {
        eigen_shift: Some(c0),
        ..MethodConfig::score()
    };
    spectral_cluster(g, k, &cfg, seed)
}

/// Directed-graph clustering from singular vectors.
///
/// Takes the top `k` singular triplets of the (asymmetric) adjacency, forms
/// clipped ratio rows separately for the left and right vectors on the
/// supports where the leading vectors are nonzero (rows off a support stay
/// zero), and k-means the concatenated `n x (2k-2)` embedding. The result
/// records how many nodes fell outside each support.
pub fn dscore(g: &Graph, k: usize, t: f64, seed: u64) -> Result<ClusterResult, ClusterError> {
    if !g.is_directed() {
        return Err(ClusterError::NotDirected);
    }
    if k < 2 {
        return Err(ClusterError::RatioNeedsTwo(k));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(ClusterError::BadConfig(format!(
            "ratio threshold must be positive and finite, got {t}"
        )));
    }
    let a = g.adjacency();
    let (embedding, off_left, off_right) = dscore_embedding(&a.view(), k, t)?;
    let mut res = kmeans(&embedding.view(), k, seed, KMEANS_RESTARTS)?;
    res.off_support = Some((off_left, off_right));
    Ok(res)
}

/// The `[U, V]` ratio embedding behind [`dscore`], plus off-support counts.
pub(crate) fn dscore_embedding(
    a: &ArrayView2<f64>,
    k: usize,
    t: f64,
) -> Result<(Array2<f64>, usize, usize), ClusterError> {
    const SUPPORT_TOL: f64 = 1e-12;
    let svd = svd_top(a, k)?;
    let n = a.nrows();
    let mut embedding = Array2::zeros((n, 2 * (k - 1)));
    let mut off_left = 0usize;
    let mut off_right = 0usize;
    for i in 0..n {
        let u1 = svd.left[[i, 0]];
        if u1.abs() > SUPPORT_TOL {
            for m in 1..k {
                embedding[[i, m - 1]] = (svd.left[[i, m]] / u1).clamp(-t, t);
            }
        } else {
            off_left += 1;
        }
        let v1 = svd.right[[i, 0]];
        if v1.abs() > SUPPORT_TOL {
            for m in 1..k {
                embedding[[i, (k - 1) + (m - 1)]] = (svd.right[[i, m]] / v1).clamp(-t, t);
            }
        } else {
            off_right += 1;
        }
    }
    Ok((embedding, off_left, off_right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::hamming_error;
    use crate::netcore::{expected_adjacency, sample_dcmm, synthetic, DcmmParams};
    use crate::rng::{derive_seed, rng_from_seed};
    use approx::assert_abs_diff_eq;
    use ndarray::{arr1, arr2};
    use rand::Rng;

    fn three_block_params() -> (DcmmParams, Vec<usize>) {
        let theta = synthetic::ThetaSpec::Uniform { lo: 0.4, hi: 1.0 };
        synthetic::dcbm_instance(60, 3, 0.9, 0.15, theta, 11).unwrap()
    }

    #[test]
    fn oracle_expected_adjacency_recovers_blocks_exactly() {
        let (params, truth) = three_block_params();
        let (omega, _) = expected_adjacency(&params, false);
        let res =
            spectral_cluster_matrix(&omega.view(), 3, &MethodConfig::score(), 5).unwrap();
        let (count, _) = hamming_error(&res.labels, &truth).unwrap();
        assert_eq!(count, 0);
    }

    #[test]
    fn oracle_ratio_embedding_has_exactly_k_distinct_rows() {
        let (params, _) = three_block_params();
        let (omega, _) = expected_adjacency(&params, false);
        let eig = eigs_sym(&omega.view(), 3).unwrap();
        let rm = ratio_normalize_columns(&eig.vectors.view(), ThresholdRule::Auto).unwrap();
        let mut distinct: Vec<Vec<f64>> = Vec::new();
        'rows: for row in rm.r.rows() {
            for d in &distinct {
                if row.iter().zip(d).all(|(a, b)| (a - b).abs() < 1e-8) {
                    continue 'rows;
                }
            }
            distinct.push(row.to_vec());
        }
        assert_eq!(distinct.len(), 3);
    }

    #[test]
    fn disconnected_graph_is_refused() {
        let g = Graph::from_edges(
            None,
            [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)],
            false,
        )
        .unwrap();
        assert!(matches!(
            spectral_cluster(&g, 2, &MethodConfig::score(), 0),
            Err(ClusterError::Disconnected(2))
        ));
    }

    #[test]
    fn ratio_mode_needs_two_clusters() {
        let g = Graph::from_edges(None, [(0, 1), (1, 2), (2, 0)], false).unwrap();
        assert!(matches!(
            spectral_cluster(&g, 1, &MethodConfig::score(), 0),
            Err(ClusterError::RatioNeedsTwo(1))
        ));
        // raw-row mode is fine with one cluster
        spectral_cluster(&g, 1, &MethodConfig::osc(), 0).unwrap();
    }

    #[test]
    fn extra_rule_requires_weighting() {
        let g = Graph::from_edges(None, [(0, 1), (1, 2), (2, 0)], false).unwrap();
        let cfg = MethodConfig {
            extra_eigenvector_rule: Some(0.1),
            ..MethodConfig::score()
        };
        assert!(matches!(
            spectral_cluster(&g, 2, &cfg, 0),
            Err(ClusterError::BadConfig(_))
        ));
    }

    #[test]
    fn labels_survive_flipping_a_trailing_eigenvector() {
        let (params, _) = three_block_params();
        let g = sample_dcmm(&params, 77).unwrap();
        let eig = eigs_sym(&g.adjacency().view(), 3).unwrap();
        let cfg = MethodConfig::score();
        let base = cluster_from_eigen(&eig, 3, &cfg, 9).unwrap();
        for flip in 1..3 {
            let mut flipped = eig.clone();
            let mut col = flipped.vectors.column_mut(flip);
            col.mapv_inplace(|x| -x);
            let res = cluster_from_eigen(&flipped, 3, &cfg, 9).unwrap();
            let (count, _) = hamming_error(&res.labels, &base.labels).unwrap();
            assert_eq!(count, 0, "flip of column {flip} changed the clustering");
        }
    }

    #[test]
    fn zero_shift_is_pointwise_identical_to_plain_score() {
        let (params, _) = three_block_params();
        let g = sample_dcmm(&params, 31).unwrap();
        let plain = spectral_cluster(&g, 3, &MethodConfig::score(), 12).unwrap();
        let star = score_star(&g, 3, 0.0, 12).unwrap();
        assert_eq!(plain.labels, star.labels);
        assert_eq!(plain.centers, star.centers);
        assert_eq!(plain.inertia, star.inertia);
    }

    #[test]
    fn zero_gap_threshold_never_uses_the_extra_vector() {
        let (params, _) = three_block_params();
        let g = sample_dcmm(&params, 13).unwrap();
        let res = score_plus(&g, 3, 0.0, 0.05, 4).unwrap();
        assert_eq!(res.used_extra_eigenvector, Some(false));
    }

    #[test]
    fn strong_gap_falls_back_to_the_weighted_laplacian_pipeline() {
        // strong signal: the relative gap after the 3rd eigenvalue is large,
        // so the extra-vector rule must not fire and the result must match
        // the same pipeline without the rule
        let theta = synthetic::ThetaSpec::Fixed { value: 0.9 };
        let (params, _) = synthetic::dcbm_instance(45, 3, 0.95, 0.05, theta, 3).unwrap();
        let g = sample_dcmm(&params, 8).unwrap();
        let plus = score_plus(&g, 3, 0.1, 0.05, 21).unwrap();
        assert_eq!(plus.used_extra_eigenvector, Some(false));
        let cfg = MethodConfig {
            pre_pca: PrePca::LaplacianMax { delta: 0.05 },
            weight_by_eigenvalue: true,
            ..MethodConfig::score()
        };
        let base = spectral_cluster(&g, 3, &cfg, 21).unwrap();
        assert_eq!(plus.labels, base.labels);
    }

    #[test]
    fn graph_and_matrix_paths_agree() {
        let (params, _) = three_block_params();
        let g = sample_dcmm(&params, 19).unwrap();
        let from_graph = spectral_cluster(&g, 3, &MethodConfig::rsc(), 2).unwrap();
        let from_matrix =
            spectral_cluster_matrix(&g.adjacency().view(), 3, &MethodConfig::rsc(), 2).unwrap();
        assert_eq!(from_graph.labels, from_matrix.labels);
        assert_eq!(from_graph.inertia, from_matrix.inertia);
    }

    #[test]
    fn config_deserializes_from_json_blob() {
        let cfg: MethodConfig = serde_json::from_str(
            r#"{
                "pre-pca": {"laplacian-mean": {"delta": 0.1}},
                "post-pca": {"score": {"threshold": "auto"}},
                "weight-by-eigenvalue": true
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.pre_pca, PrePca::LaplacianMean { delta: 0.1 });
        assert!(cfg.weight_by_eigenvalue);
        assert_eq!(cfg.extra_eigenvector_rule, None);
        let defaults: MethodConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(defaults, MethodConfig::score());
    }

    fn directed_two_block(seed: u64) -> (Graph, Vec<usize>) {
        // planted asymmetric-affinity model, strong signal
        let n = 120;
        let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        let p = arr2(&[[0.95, 0.05], [0.25, 0.85]]);
        let theta: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 0.7 } else { 1.0 }).collect();
        let mut rng = rng_from_seed(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pij = theta[i] * theta[j] * p[[truth[i], truth[j]]];
                if rng.gen::<f64>() < pij {
                    edges.push((i, j));
                }
            }
        }
        (Graph::from_edges(Some(n), edges, true).unwrap(), truth)
    }

    #[test]
    fn dscore_oracle_embedding_has_two_distinct_rows() {
        // expected adjacency of the asymmetric model, rank 2
        let n = 30;
        let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        let p = arr2(&[[0.9, 0.1], [0.3, 0.8]]);
        let theta = arr1(
            &(0..n)
                .map(|i| 0.5 + 0.4 * ((i % 5) as f64) / 4.0)
                .collect::<Vec<f64>>(),
        );
        let mut omega = ndarray::Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                omega[[i, j]] = theta[i] * theta[j] * p[[truth[i], truth[j]]];
            }
        }
        let (embedding, off_l, off_r) = dscore_embedding(&omega.view(), 2, 30f64.ln()).unwrap();
        assert_eq!((off_l, off_r), (0, 0));
        let mut distinct: Vec<Vec<f64>> = Vec::new();
        'rows: for row in embedding.rows() {
            for d in &distinct {
                if row.iter().zip(d).all(|(a, b)| (a - b).abs() < 1e-8) {
                    continue 'rows;
                }
            }
            distinct.push(row.to_vec());
        }
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn dscore_recovers_directed_blocks() {
        let (g, truth) = directed_two_block(424242);
        let res = dscore(&g, 2, (g.node_count() as f64).ln(), 6).unwrap();
        assert_eq!(res.off_support, Some((0, 0)));
        let (count, _) = hamming_error(&res.labels, &truth).unwrap();
        assert_eq!(count, 0);
    }

    #[test]
    fn symmetric_digraph_gives_matching_left_and_right_halves() {
        // two complete 4-blocks joined by a bridge: both leading eigenvalues
        // are positive, so left and right singular vectors coincide (a
        // negative eigenvalue would negate the right one instead)
        let mut undirected = Vec::new();
        for block in [0usize, 4] {
            for a in block..block + 4 {
                for b in (a + 1)..block + 4 {
                    undirected.push((a, b));
                }
            }
        }
        undirected.push((0, 4));
        let mut both = Vec::new();
        for &(a, b) in &undirected {
            both.push((a, b));
            both.push((b, a));
        }
        let g = Graph::from_edges(None, both, true).unwrap();
        let a = g.adjacency();
        for i in 0..g.node_count() {
            for j in 0..g.node_count() {
                assert_eq!(a[[i, j]], a[[j, i]]);
            }
        }
        let eig = eigs_sym(&a.view(), 2).unwrap();
        assert!(eig.values.iter().all(|&l| l > 0.0));
        let (embedding, _, _) = dscore_embedding(&a.view(), 2, 10.0).unwrap();
        for i in 0..g.node_count() {
            assert_abs_diff_eq!(embedding[[i, 0]], embedding[[i, 1]], epsilon = 1e-8);
        }
    }

    #[test]
    fn isolated_node_lands_off_support_with_zero_rows() {
        let edges = [
            (0usize, 1usize),
            (1, 0),
            (1, 2),
            (2, 0),
            (3, 1),
            (0, 3),
            (2, 3),
        ];
        let g = Graph::from_edges(Some(5), edges, true).unwrap();
        let a = g.adjacency();
        let (embedding, off_l, off_r) = dscore_embedding(&a.view(), 2, 10.0).unwrap();
        assert_eq!((off_l, off_r), (1, 1));
        assert_eq!(embedding[[4, 0]], 0.0);
        assert_eq!(embedding[[4, 1]], 0.0);
        let res = dscore(&g, 2, 10.0, 0).unwrap();
        assert_eq!(res.off_support, Some((1, 1)));
        assert_eq!(res.labels.len(), 5);
    }

    #[test]
    fn dscore_rejects_undirected_graphs_and_bad_thresholds() {
        let g = Graph::from_edges(None, [(0, 1), (1, 2)], false).unwrap();
        assert!(matches!(dscore(&g, 2, 3.0, 0), Err(ClusterError::NotDirected)));
        let d = Graph::from_edges(None, [(0, 1), (1, 2), (2, 0)], true).unwrap();
        assert!(matches!(
            dscore(&d, 2, 0.0, 0),
            Err(ClusterError::BadConfig(_))
        ));
        assert!(matches!(
            dscore(&d, 1, 3.0, 0),
            Err(ClusterError::RatioNeedsTwo(1))
        ));
    }

    #[test]
    fn sampled_dcbm_is_recovered_with_default_score() {
        // moderate-size sampled graph, strong signal: plain ratios, seeded
        // k-means, exact recovery
        let theta = synthetic::ThetaSpec::Uniform { lo: 0.6, hi: 1.0 };
        let (params, truth) = synthetic::dcbm_instance(90, 3, 0.9, 0.08, theta, 5).unwrap();
        let g = sample_dcmm(&params, derive_seed(5, "pipeline-strong", 0)).unwrap();
        let res = spectral_cluster(&g, 3, &MethodConfig::score(), 1).unwrap();
        let (count, _) = hamming_error(&res.labels, &truth).unwrap();
        assert_eq!(count, 0);
    }
}
