//! Hypothesis tests and model selection on networks: the SgnQ global test
//! for more-than-one community, quadrilateral counting, a DCBM plug-in
//! estimator, stepwise goodness-of-fit selection of the community count, and
//! a recursive community tree built from repeated testing and splitting.

use crate::community::{score_star, spectral_cluster, ClusterError, MethodConfig};
use crate::netcore::{giant_component, sample_symmetric_bernoulli, Graph, NetError};
use crate::par;
use crate::rng::derive_seed;
use crate::spectra::eigs_sym;
use ndarray::{Array2, ArrayView2};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InfError {
    #[error("graph has no edges; the statistic is undefined")]
    NoEdges,
    #[error("eta norm squared is {0}; values <= 1 make the test degenerate")]
    DegenerateEta(f64),
    #[error("test statistics need an undirected graph")]
    Directed,
    #[error("labels cover {got} nodes, graph has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("cluster {0} has zero total degree")]
    ZeroDegreeCluster(usize),
    #[error("the scan range must satisfy 1 <= m_max <= 12, got {0}")]
    BadScanRange(usize),
    #[error("graph has {0} connected components; analyze one component at a time")]
    Disconnected(usize),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Output of the SgnQ test.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SgnqResult {
    /// Signed quadrilateral sum over distinct ordered 4-tuples.
    pub q_n: f64,
    /// Standardized statistic; approximately N(0,1) under one community.
    pub phi_n: f64,
    /// Squared norm of the degree-normalized vector; exceeds 1 whenever some
    /// node has two or more neighbors.
    pub eta_norm_sq: f64,
    /// Upper-tail p-value `1 - Phi(phi_n)`.
    pub p_value: f64,
}

/// Number of ordered traversals of quadrilaterals:
/// `tr(A^4) - 2 sum_i d_i^2 + sum_i d_i`. Each plain quadrilateral is counted
/// eight times (4 starting points, 2 directions).
pub fn count_quadrilaterals(g: &Graph) -> Result<u64, InfError> {
    if g.is_directed() {
        return Err(InfError::Directed);
    }
    let a = g.adjacency();
    let a2 = a.dot(&a);
    let tr4: f64 = a2.iter().map(|&x| x * x).sum();
    let (mut s2, mut s1) = (0.0f64, 0.0f64);
    for d in g.degrees() {
        let d = d as f64;
        s2 += d * d;
        s1 += d;
    }
    let c = tr4 - 2.0 * s2 + s1;
    debug_assert!(c >= -1e-6 && (c - c.round()).abs() < 1e-6);
    Ok(c.round().max(0.0) as u64)
}

/// Reference enumeration over all distinct ordered 4-tuples; exponentially
/// slower than the closed form and kept for verification.
pub fn count_quadrilaterals_naive(g: &Graph) -> Result<u64, InfError> {
    if g.is_directed() {
        return Err(InfError::Directed);
    }
    let a = g.adjacency();
    Ok(signed_quadrilateral_sum_naive(&a.view()).round() as u64)
}

/// Sum of `M[i1,i2] M[i2,i3] M[i3,i4] M[i4,i1]` over distinct ordered
/// 4-tuples, for a symmetric zero-diagonal matrix, via inclusion-exclusion:
/// `tr(M^4) - 2 sum_i (sum_j M_ij^2)^2 + sum_ij M_ij^4`.
pub fn signed_quadrilateral_sum(m: &ArrayView2<f64>) -> f64 {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    debug_assert!((0..n).all(|i| m[[i, i]] == 0.0));
    let m2 = m.dot(m);
    let tr4: f64 = m2.iter().map(|&x| x * x).sum();
    let row_sq: Vec<f64> = par::map_indexed(n, |i| m.row(i).iter().map(|&x| x * x).sum());
    let s: f64 = row_sq.iter().map(|&r| r * r).sum();
    let f: f64 = m.iter().map(|&x| x * x * x * x).sum();
    tr4 - 2.0 * s + f
}

/// Reference quadruple loop over distinct ordered 4-tuples.
pub fn signed_quadrilateral_sum_naive(m: &ArrayView2<f64>) -> f64 {
    let n = m.nrows();
    let mut total = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            if i2 == i1 {
                continue;
            }
            for i3 in 0..n {
                if i3 == i1 || i3 == i2 {
                    continue;
                }
                for i4 in 0..n {
                    if i4 == i1 || i4 == i2 || i4 == i3 {
                        continue;
                    }
                    total += m[[i1, i2]] * m[[i2, i3]] * m[[i3, i4]] * m[[i4, i1]];
                }
            }
        }
    }
    total
}

/// The SgnQ test for the null of a single (degree-heterogeneous) community.
///
/// Centers the adjacency by the rank-one degree profile
/// `eta_i = d_i / sqrt(sum d)`, sums signed quadrilaterals of the centered
/// matrix, standardizes, and reports the upper-tail p-value.
pub fn sgnq(g: &Graph) -> Result<SgnqResult, InfError> {
    if g.is_directed() {
        return Err(InfError::Directed);
    }
    let degrees = g.degrees();
    let total: f64 = degrees.iter().map(|&d| d as f64).sum();
    if total <= 0.0 {
        return Err(InfError::NoEdges);
    }
    let eta: Vec<f64> = degrees.iter().map(|&d| d as f64 / total.sqrt()).collect();
    let eta_norm_sq: f64 = eta.iter().map(|&x| x * x).sum();
    if eta_norm_sq <= 1.0 {
        return Err(InfError::DegenerateEta(eta_norm_sq));
    }
    let n = g.node_count();
    let mut m = g.adjacency();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[[i, j]] -= eta[i] * eta[j];
            }
        }
    }
    let q_n = signed_quadrilateral_sum(&m.view());
    let centered = eta_norm_sq - 1.0;
    let phi_n = (q_n - 2.0 * centered * centered) / (8.0 * centered.powi(4)).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p_value = 1.0 - normal.cdf(phi_n);
    Ok(SgnqResult {
        q_n,
        phi_n,
        eta_norm_sq,
        p_value,
    })
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("unit normal")
        .inverse_cdf(p)
}

/// Degree-corrected block-model plug-in:
/// `omega(i,j) = d_i d_j E[k(i),k(j)] / (D[k(i)] D[k(j)])` where `E` sums
/// adjacency entries over label blocks (diagonal blocks count each edge
/// twice) and `D` sums degrees per block. Entries are clipped to
/// `[0, 1 - 1e-6]` and the diagonal is zeroed, so the result is a valid
/// Bernoulli mean matrix.
pub fn fit_dcbm_plugin(g: &Graph, labels: &[usize]) -> Result<Array2<f64>, InfError> {
    let n = g.node_count();
    if labels.len() != n {
        return Err(InfError::LengthMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(InfError::EmptyCluster(empty));
    }
    let degrees: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let mut block_degree = vec![0.0f64; k];
    for (i, &l) in labels.iter().enumerate() {
        block_degree[l] += degrees[i];
    }
    if let Some(dead) = block_degree.iter().position(|&d| d <= 0.0) {
        return Err(InfError::ZeroDegreeCluster(dead));
    }
    let mut block_sum = Array2::<f64>::zeros((k, k));
    for &(u, v) in g.edges() {
        let (a, b) = (labels[u as usize], labels[v as usize]);
        block_sum[[a, b]] += 1.0;
        block_sum[[b, a]] += 1.0;
    }
    let rows = par::map_indexed(n, |i| {
        let li = labels[i];
        let mut row = vec![0.0f64; n];
        for (j, slot) in row.iter_mut().enumerate() {
            if j == i {
                continue;
            }
            let lj = labels[j];
            let raw: f64 =
                degrees[i] * degrees[j] * block_sum[[li, lj]] / (block_degree[li] * block_degree[lj]);
            *slot = raw.clamp(0.0, 1.0 - 1e-6);
        }
        row
    });
    let mut omega = Array2::zeros((n, n));
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            omega[[i, j]] = x;
        }
    }
    Ok(omega)
}

/// Trace of the stepwise goodness-of-fit scan.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GofTrace {
    /// Standardized statistic per scanned `m` (1-based: `psi[0]` is `m = 1`).
    pub psi: Vec<f64>,
    /// Signed quadrilateral sum of the residual matrix per scanned `m`.
    pub q: Vec<f64>,
    /// Bootstrap bias estimate per scanned `m`.
    pub bias: Vec<f64>,
    /// Quadrilateral count of the observed graph (variance proxy).
    pub c_n: u64,
    /// Rejection boundary `z_alpha` used for the stop rule.
    pub z_alpha: f64,
    /// First `m` with `psi <= z_alpha`, if any was found in range.
    pub k_hat: Option<usize>,
}

/// One goodness-of-fit evaluation at a fixed candidate community count.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GofStep {
    /// Standardized, bootstrap-debiased residual statistic.
    pub psi: f64,
    /// Signed quadrilateral sum of the residual `A - Omega_hat`.
    pub q: f64,
    /// Bootstrap mean of the same statistic under the fitted model.
    pub bias: f64,
    /// Quadrilateral count of the observed graph.
    pub c_n: u64,
}

/// Test how well an `m`-community plug-in explains the graph: cluster (or
/// pool everything when `m = 1`), fit the plug-in, measure the signed
/// quadrilaterals left in the residual, and debias with a parametric
/// bootstrap (`resamples` redraws from the fit, resample `r` seeded
/// `seed + r`). Small `psi` means no detectable leftover structure.
pub fn gof_statistic(
    g: &Graph,
    m: usize,
    resamples: usize,
    seed: u64,
) -> Result<GofStep, InfError> {
    if m == 0 || m > 12 {
        return Err(InfError::BadScanRange(m));
    }
    if resamples == 0 {
        return Err(InfError::InvalidParams("need at least one resample".into()));
    }
    let parts = g.components().len();
    if parts != 1 {
        return Err(InfError::Disconnected(parts));
    }
    let c_n = count_quadrilaterals(g)?;
    if c_n == 0 {
        return Err(InfError::InvalidParams(
            "graph has no quadrilaterals; the statistic is degenerate".into(),
        ));
    }
    let labels = if m == 1 {
        vec![0usize; g.node_count()]
    } else {
        spectral_cluster(g, m, &MethodConfig::score(), seed)?.labels
    };
    let omega = fit_dcbm_plugin(g, &labels)?;
    let q = residual_quadrilaterals(&g.adjacency(), &omega);
    let resampled: Vec<Result<f64, InfError>> = par::map_indexed(resamples, |r| {
        let draw = sample_symmetric_bernoulli(omega.view(), seed.wrapping_add(r as u64))?;
        Ok(residual_quadrilaterals(&draw.adjacency(), &omega))
    });
    let mut bias_sum = 0.0;
    for r in resampled {
        bias_sum += r?;
    }
    let bias = bias_sum / resamples as f64;
    let psi = (q - bias) / (8.0 * c_n as f64).sqrt();
    Ok(GofStep { psi, q, bias, c_n })
}

/// Scan `m = 1..=m_max` with [`gof_statistic`] and stop at the first `m`
/// whose standardized statistic drops below `z_alpha`.
pub fn stepwise_gof(
    g: &Graph,
    alpha: f64,
    m_max: usize,
    resamples: usize,
    seed: u64,
) -> Result<GofTrace, InfError> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(InfError::InvalidParams(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    if m_max == 0 || m_max > 12 {
        return Err(InfError::BadScanRange(m_max));
    }
    let z_alpha = normal_quantile(1.0 - alpha);
    let mut trace = GofTrace {
        psi: Vec::new(),
        q: Vec::new(),
        bias: Vec::new(),
        c_n: 0,
        z_alpha,
        k_hat: Option::None,
    };
    for m in 1..=m_max {
        let step = gof_statistic(g, m, resamples, seed)?;
        trace.c_n = step.c_n;
        trace.psi.push(step.psi);
        trace.q.push(step.q);
        trace.bias.push(step.bias);
        if step.psi <= z_alpha {
            trace.k_hat = Some(m);
            break;
        }
    }
    Ok(trace)
}

fn residual_quadrilaterals(a: &Array2<f64>, omega: &Array2<f64>) -> f64 {
    let mut residual = a - omega;
    residual.diag_mut().fill(0.0);
    signed_quadrilateral_sum(&residual.view())
}

/// How the split size is chosen at each internal tree node.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KSelector {
    /// Pick `K in 2..=k_max` maximizing the relative eigen-gap
    /// `(|lambda_K| - |lambda_{K+1}|) / |lambda_K|` of the subgraph adjacency.
    Scree { k_max: usize },
    /// Fixed split size per depth; the last entry repeats for deeper levels.
    Fixed { per_depth: Vec<usize> },
}

impl KSelector {
    fn choose(&self, sub: &Graph, depth: usize) -> Result<Option<usize>, InfError> {
        match self {
            KSelector::Fixed { per_depth } => {
                let k = *per_depth
                    .get(depth)
                    .or_else(|| per_depth.last())
                    .ok_or_else(|| {
                        InfError::InvalidParams("fixed K list must not be empty".into())
                    })?;
                if k < 2 {
                    return Err(InfError::InvalidParams(format!(
                        "fixed split size must be at least 2, got {k}"
                    )));
                }
                Ok(Some(k))
            }
            KSelector::Scree { k_max } => {
                if *k_max < 2 {
                    return Err(InfError::InvalidParams(format!(
                        "scree needs k_max >= 2, got {k_max}"
                    )));
                }
                let n = sub.node_count();
                let want = (*k_max + 1).min(n);
                if want < 3 {
                    return Ok(Option::None);
                }
                let eig = match eigs_sym(&sub.adjacency().view(), want) {
                    Ok(e) => e,
                    Err(_) => return Ok(Option::None),
                };
                let mags: Vec<f64> = eig.values.iter().map(|&l| l.abs()).collect();
                let mut best: Option<(f64, usize)> = Option::None;
                for k in 2..=want - 1 {
                    let lead = mags[k - 1];
                    if lead <= 0.0 {
                        continue;
                    }
                    let gap = (lead - mags[k]) / lead;
                    if best.map_or(true, |(bg, _)| gap > bg) {
                        best = Some((gap, k));
                    }
                }
                Ok(best.map(|(_, k)| k))
            }
        }
    }
}

/// One node of the recursive community tree.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TreeNode {
    /// Node ids of the original graph, sorted ascending.
    pub members: Vec<usize>,
    /// SgnQ p-value on the giant component of the induced subgraph (1.0 when
    /// the subgraph was too small or degenerate to test).
    pub p_value: f64,
    /// Number of spectral clusters this node was split into, when internal.
    pub split_k: Option<usize>,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Recursive testing/splitting result.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CommunityTree {
    pub root: TreeNode,
}

impl CommunityTree {
    /// Leaves in depth-first order; their member sets partition the root's.
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a TreeNode, out: &mut Vec<&'a TreeNode>) {
            if node.is_leaf() {
                out.push(node);
            } else {
                for child in &node.children {
                    walk(child, out);
                }
            }
        }
        walk(&self.root, &mut out);
        out
    }

    /// Indented listing, one node per line: `C1`, `C1-1`, `C1-1-2`, ...
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        fn walk(node: &TreeNode, label: &str, depth: usize, out: &mut String) {
            use std::fmt::Write;
            let _ = writeln!(
                out,
                "{}{} ({} nodes, p = {:.4}{})",
                "  ".repeat(depth),
                label,
                node.members.len(),
                node.p_value,
                match node.split_k {
                    Some(k) => format!(", split into {k}"),
                    Option::None => String::new(),
                }
            );
            for (j, child) in node.children.iter().enumerate() {
                walk(child, &format!("{label}-{}", j + 1), depth + 1, out);
            }
        }
        walk(&self.root, "C1", 0, &mut out);
        out
    }
}

/// Recursively test each candidate community with SgnQ and split it with the
/// shifted-eigenvalue clustering variant while the test keeps rejecting.
///
/// A node becomes a leaf when its p-value exceeds `alpha0`, when it has fewer
/// than `min_split` members, or when it is too degenerate to test or split.
/// Passing `alpha0 >= 1` disables splitting entirely (every p-value would
/// need to exceed 1), so the root is returned as the single leaf. The root
/// member set is the giant component of `g`.
pub fn hier_score(
    g: &Graph,
    alpha0: f64,
    selector: &KSelector,
    min_split: usize,
    seed: u64,
) -> Result<CommunityTree, InfError> {
    if !(alpha0 > 0.0 && alpha0 <= 1.0) {
        return Err(InfError::InvalidParams(format!(
            "alpha0 must lie in (0, 1], got {alpha0}"
        )));
    }
    let (_, giant_members) = giant_component(g);
    let mut members = giant_members;
    members.sort_unstable();
    let mut node_counter = 0u64;
    let root = build_node(
        g,
        members,
        0,
        alpha0,
        selector,
        min_split,
        seed,
        &mut node_counter,
    )?;
    Ok(CommunityTree { root })
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    g: &Graph,
    mut members: Vec<usize>,
    depth: usize,
    alpha0: f64,
    selector: &KSelector,
    min_split: usize,
    seed: u64,
    node_counter: &mut u64,
) -> Result<TreeNode, InfError> {
    members.sort_unstable();
    let my_id = *node_counter;
    *node_counter += 1;
    let leaf = |p: f64| TreeNode {
        members: members.clone(),
        p_value: p,
        split_k: Option::None,
        children: Vec::new(),
    };
    if members.len() < min_split {
        return Ok(leaf(1.0));
    }
    let (sub, _) = g.induced_subgraph(&members)?;
    let components = sub.components();
    let giant_local: Vec<usize> = components
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .cloned()
        .unwrap_or_default();
    let (giant, giant_map) = sub.induced_subgraph(&giant_local)?;
    let p_value = match sgnq(&giant) {
        Ok(r) => r.p_value,
        Err(_) => 1.0,
    };
    if p_value > alpha0 || alpha0 >= 1.0 {
        return Ok(leaf(p_value));
    }
    let Some(k) = selector.choose(&giant, depth)? else {
        return Ok(leaf(p_value));
    };
    if giant.node_count() < k {
        return Ok(leaf(p_value));
    }
    let split = score_star(&giant, k, 1.0, derive_seed(seed, "hier-split", my_id))?;
    // children: the k clusters of the giant, then any remaining components
    let mut child_sets: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (local, &label) in split.labels.iter().enumerate() {
        child_sets[label].push(members[giant_map[local]]);
    }
    for comp in &components {
        if comp == &giant_local {
            continue;
        }
        child_sets.push(comp.iter().map(|&local| members[local]).collect());
    }
    if child_sets.iter().any(Vec::is_empty) {
        return Ok(leaf(p_value));
    }
    let mut children = Vec::with_capacity(child_sets.len());
    for set in child_sets {
        children.push(build_node(
            g,
            set,
            depth + 1,
            alpha0,
            selector,
            min_split,
            seed,
            node_counter,
        )?);
    }
    Ok(TreeNode {
        members,
        p_value,
        split_k: Some(k),
        children,
    })
}
