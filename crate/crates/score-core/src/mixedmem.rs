//! Mixed-membership estimation on degree-corrected mixed-membership graphs.
//!
//! The pipeline embeds nodes as entrywise eigenvector ratios, hunts the
//! simplex vertices of that cloud, solves barycentric weights per node, and
//! converts weights to membership rows through the spectrum-derived scale
//! factors `b1`. A dynamic variant re-embeds later network snapshots against
//! the eigenpairs of the first snapshot.

use crate::netcore::Graph;
use crate::par;
use crate::spectra::{
    auto_threshold, eigs_sym, ratio_normalize, EigenPairs, RatioMatrix, SpectraError,
    ThresholdRule,
};
use crate::vertexhunt::{vertex_hunt, VertexSet, VhError, VhMethod, VhParams};
use ndarray::{Array2, ArrayView1, ArrayView2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MixedError {
    #[error("membership estimation needs k >= 2 communities, got {0}")]
    TooFewCommunities(usize),
    #[error("graph has {0} connected components; analyze one component at a time")]
    Disconnected(usize),
    #[error("b1 radicand for vertex {index} is {value:e}; the vertex set or eigen ordering is wrong")]
    BadRadicand { index: usize, value: f64 },
    #[error("vertex system is singular; vertices are affinely dependent")]
    SingularVertices,
    #[error("reference eigenvalue {0} is zero; dynamic ratios are undefined")]
    ZeroEigenvalue(usize),
    #[error("snapshot {t} has {got} nodes, the first snapshot has {expected}")]
    NodeCountMismatch { t: usize, expected: usize, got: usize },
    #[error("need at least one snapshot")]
    NoSnapshots,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    VertexHunt(#[from] VhError),
}

/// Estimated membership matrix plus the geometry it came from.
#[derive(Debug, Clone)]
pub struct MembershipEstimate {
    /// `n x K`; each row is a probability vector over communities.
    pub pi_hat: Array2<f64>,
    /// Hunted simplex vertices; row `j` corresponds to column `j` of `pi_hat`.
    pub vertices: VertexSet,
    /// Positive scale factor per vertex, from the eigenvalue formula.
    pub b1_hat: Vec<f64>,
    /// Rows whose clipped weights were all zero and fell back to uniform.
    /// Cannot happen when weights genuinely sum to one; nonzero values flag a
    /// badly failed vertex hunt.
    pub uniform_fallbacks: usize,
}

impl MembershipEstimate {
    pub fn node_count(&self) -> usize {
        self.pi_hat.nrows()
    }

    pub fn community_count(&self) -> usize {
        self.pi_hat.ncols()
    }
}

/// Per-snapshot estimates plus vertex-distance trajectories.
#[derive(Debug, Clone)]
pub struct DynamicMembership {
    pub estimates: Vec<MembershipEstimate>,
    /// One `n x K` matrix per snapshot: Euclidean distance from each node's
    /// embedded point to each simplex vertex of that snapshot.
    pub trajectories: Vec<Array2<f64>>,
}

/// Scale factors `b1(k) = [lambda_1 + v_k' diag(lambda_2..lambda_K) v_k]^{-1/2}`
/// for each vertex row `v_k`, in the eigenvalue order of `EigenPairs`.
pub fn b1_from_spectra(lambdas: &[f64], vertices: &VertexSet) -> Result<Vec<f64>, MixedError> {
    let k = lambdas.len();
    if vertices.k() != k || vertices.dim() != k - 1 {
        return Err(MixedError::InvalidParams(format!(
            "need {k} vertices of dimension {}, got {} of dimension {}",
            k - 1,
            vertices.k(),
            vertices.dim()
        )));
    }
    let mut out = Vec::with_capacity(k);
    for (index, v) in vertices.vertices.rows().into_iter().enumerate() {
        let quad: f64 = v
            .iter()
            .zip(&lambdas[1..])
            .map(|(&vc, &lam)| lam * vc * vc)
            .sum();
        let radicand = lambdas[0] + quad;
        if radicand <= 0.0 {
            return Err(MixedError::BadRadicand {
                index,
                value: radicand,
            });
        }
        out.push(radicand.powf(-0.5));
    }
    Ok(out)
}

/// Weights expressing `point` as an affine combination of the vertex rows:
/// `K - 1` coordinate equations plus the sum-to-one constraint, solved
/// exactly. Weights can be negative for points outside the simplex.
pub fn barycentric_weights(
    point: &ArrayView1<f64>,
    vertices: &ArrayView2<f64>,
) -> Result<Vec<f64>, MixedError> {
    let k = vertices.nrows();
    let d = vertices.ncols();
    if point.len() != d || k != d + 1 {
        return Err(MixedError::InvalidParams(format!(
            "point of dimension {} needs {} vertices of dimension {}, got {k} x {d}",
            point.len(),
            point.len() + 1,
            point.len()
        )));
    }
    let mut m = nalgebra::DMatrix::zeros(k, k);
    let mut rhs = nalgebra::DVector::zeros(k);
    for c in 0..d {
        for j in 0..k {
            m[(c, j)] = vertices[[j, c]];
        }
        rhs[c] = point[c];
    }
    for j in 0..k {
        m[(d, j)] = 1.0;
    }
    rhs[d] = 1.0;
    let sol = m.lu().solve(&rhs).ok_or(MixedError::SingularVertices)?;
    Ok(sol.iter().copied().collect())
}

/// Clip `w(k)/b1(k)` at zero and renormalize to a probability vector; an
/// all-zero row falls back to uniform and reports it.
fn pi_star_row(weights: &[f64], b1: &[f64]) -> (Vec<f64>, bool) {
    let mut row: Vec<f64> = weights
        .iter()
        .zip(b1)
        .map(|(&w, &b)| (w / b).max(0.0))
        .collect();
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        let k = row.len();
        return (vec![1.0 / k as f64; k], true);
    }
    for x in row.iter_mut() {
        *x /= total;
    }
    (row, false)
}

fn estimate_from_cloud(
    lambdas: &[f64],
    cloud: &Array2<f64>,
    vertices: VertexSet,
) -> Result<MembershipEstimate, MixedError> {
    let b1 = b1_from_spectra(lambdas, &vertices)?;
    let n = cloud.nrows();
    let k = b1.len();
    let rows = par::map_indexed(n, |i| {
        barycentric_weights(&cloud.row(i), &vertices.vertices.view())
            .map(|w| pi_star_row(&w, &b1))
    });
    let mut pi_hat = Array2::zeros((n, k));
    let mut fallbacks = 0;
    for (i, row) in rows.into_iter().enumerate() {
        let (row, fell) = row?;
        fallbacks += usize::from(fell);
        for (c, &x) in row.iter().enumerate() {
            pi_hat[[i, c]] = x;
        }
    }
    debug_assert!(pi_hat
        .rows()
        .into_iter()
        .all(|r| (r.sum() - 1.0).abs() < 1e-10 && r.iter().all(|&x| x >= 0.0)));
    Ok(MembershipEstimate {
        pi_hat,
        vertices,
        b1_hat: b1,
        uniform_fallbacks: fallbacks,
    })
}

/// Mixed-membership estimation on a graph: eigenvector ratios, vertex hunt,
/// barycentric weights, clipped and renormalized membership rows.
pub fn mixed_score(
    g: &Graph,
    k: usize,
    method: VhMethod,
    params: &VhParams,
    threshold: ThresholdRule,
    seed: u64,
) -> Result<MembershipEstimate, MixedError> {
    let parts = g.components().len();
    if parts != 1 {
        return Err(MixedError::Disconnected(parts));
    }
    mixed_score_matrix(&g.adjacency().view(), k, method, params, threshold, seed)
}

/// Same pipeline on a dense symmetric matrix. Pass the expected adjacency to
/// run the oracle version with exact eigenpairs.
pub fn mixed_score_matrix(
    a: &ArrayView2<f64>,
    k: usize,
    method: VhMethod,
    params: &VhParams,
    threshold: ThresholdRule,
    seed: u64,
) -> Result<MembershipEstimate, MixedError> {
    if k < 2 {
        return Err(MixedError::TooFewCommunities(k));
    }
    let eig = eigs_sym(a, k)?;
    let ratios = ratio_normalize(&eig, threshold)?;
    let vertices = vertex_hunt(&ratios.r.view(), k, method, params, seed)?;
    estimate_from_cloud(&eig.values, &ratios.r, vertices)
}

/// Embed one snapshot against reference eigenpairs:
/// `r_i(k) = lambda_1 (e_i' A_t xi_{k+1}) / (lambda_{k+1} (e_i' A_t xi_1))`,
/// entrywise clipped to `[-cap, cap]`. Denominators below 1e-12 in magnitude
/// give a cap-clipped entry carrying the numerator's sign (zero when the
/// numerator is tiny too).
pub fn dynamic_ratios(
    a_t: &ArrayView2<f64>,
    ref_eigs: &EigenPairs,
    cap: f64,
) -> Result<RatioMatrix, MixedError> {
    let k = ref_eigs.pair_count();
    let n = ref_eigs.node_count();
    if k < 2 {
        return Err(MixedError::TooFewCommunities(k));
    }
    if a_t.nrows() != n || a_t.ncols() != n {
        return Err(MixedError::InvalidParams(format!(
            "snapshot is {}x{}, reference eigenpairs are for {n} nodes",
            a_t.nrows(),
            a_t.ncols()
        )));
    }
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(MixedError::InvalidParams(format!(
            "ratio cap must be positive and finite, got {cap}"
        )));
    }
    for (m, &lam) in ref_eigs.values.iter().enumerate().skip(1) {
        if lam == 0.0 {
            return Err(MixedError::ZeroEigenvalue(m));
        }
    }
    let propagated = a_t.dot(&ref_eigs.vectors);
    let lam1 = ref_eigs.values[0];
    let mut r = Array2::zeros((n, k - 1));
    for i in 0..n {
        let base = propagated[[i, 0]];
        for m in 1..k {
            let num = lam1 * propagated[[i, m]];
            let den = ref_eigs.values[m] * base;
            r[[i, m - 1]] = if den.abs() < 1e-12 {
                if num.abs() < 1e-12 {
                    0.0
                } else {
                    num.signum() * cap
                }
            } else {
                (num / den).clamp(-cap, cap)
            };
        }
    }
    Ok(RatioMatrix { r, threshold: cap })
}

/// Mixed-membership estimation across snapshots sharing a node set.
///
/// Eigenpairs come from the first snapshot only; each snapshot is embedded
/// with [`dynamic_ratios`] and gets its own vertex hunt (set `pool_vertices`
/// to hunt once on the union of all embedded clouds instead). The ratio cap
/// defaults to the automatic threshold for `n`; `cap` overrides it.
pub fn dynamic_mixed_score(
    snapshots: &[Graph],
    k: usize,
    method: VhMethod,
    params: &VhParams,
    cap: Option<f64>,
    pool_vertices: bool,
    seed: u64,
) -> Result<DynamicMembership, MixedError> {
    let first = snapshots.first().ok_or(MixedError::NoSnapshots)?;
    let n = first.node_count();
    for (t, g) in snapshots.iter().enumerate().skip(1) {
        if g.node_count() != n {
            return Err(MixedError::NodeCountMismatch {
                t,
                expected: n,
                got: g.node_count(),
            });
        }
    }
    let parts = first.components().len();
    if parts != 1 {
        return Err(MixedError::Disconnected(parts));
    }
    if k < 2 {
        return Err(MixedError::TooFewCommunities(k));
    }
    let eig = eigs_sym(&first.adjacency().view(), k)?;
    let cap = cap.unwrap_or_else(|| auto_threshold(n));
    let clouds: Vec<RatioMatrix> = snapshots
        .iter()
        .map(|g| dynamic_ratios(&g.adjacency().view(), &eig, cap))
        .collect::<Result<_, _>>()?;
    let pooled = if pool_vertices {
        let mut stacked = Array2::zeros((n * clouds.len(), k - 1));
        for (t, cloud) in clouds.iter().enumerate() {
            stacked
                .slice_mut(ndarray::s![t * n..(t + 1) * n, ..])
                .assign(&cloud.r);
        }
        Some(vertex_hunt(&stacked.view(), k, method, params, seed)?)
    } else {
        None
    };
    let mut estimates = Vec::with_capacity(clouds.len());
    let mut trajectories = Vec::with_capacity(clouds.len());
    for cloud in &clouds {
        let vertices = match &pooled {
            Some(vs) => vs.clone(),
            Option::None => vertex_hunt(&cloud.r.view(), k, method, params, seed)?,
        };
        let mut dists = Array2::zeros((n, k));
        for i in 0..n {
            for j in 0..k {
                let d2: f64 = (0..k - 1)
                    .map(|c| (cloud.r[[i, c]] - vertices.vertices[[j, c]]).powi(2))
                    .sum();
                dists[[i, j]] = d2.sqrt();
            }
        }
        trajectories.push(dists);
        estimates.push(estimate_from_cloud(&eig.values, &cloud.r, vertices)?);
    }
    Ok(DynamicMembership {
        estimates,
        trajectories,
    })
}
