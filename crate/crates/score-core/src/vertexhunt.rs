//! Vertex hunting: recover the `k` corners of a (possibly noisy) point cloud
//! whose ideal shape is a simplex.
//!
//! Five methods are provided. `sp` is the greedy successive-projection pass;
//! `cvs` scores every k-subset of the points as candidate corners;
//! `svs0`/`svs-star` first sketch the cloud down to `L` local k-means centers
//! and then run `cvs`/`sp` on the centers; `svs-plus` removes low-density
//! points, averages each survivor with its nearest neighbors, and runs `sp`
//! on the denoised cloud.
//!
//! All methods return the vertices sorted lexicographically by coordinates,
//! with diagnostics: how many candidate points the final selection stage saw,
//! and the maximum distance from the input cloud to the hull of the returned
//! vertices.

use crate::community::{kmeans, ClusterError};
use crate::par;
use crate::rng::derive_seed;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VhError {
    #[error("vertex hunting needs at least k points, got {n} for k = {k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("points span an affine subspace of dimension below {0}; selection is ill-defined")]
    RankDeficient(usize),
    #[error("{combos} candidate subsets exceed the 10^6 guard; sketch the cloud first (svs0/svs-star) or lower k")]
    GuardExceeded { combos: f64 },
    #[error("the density filter dropped every point; lower the neighbor requirement")]
    AllPointsDropped,
    #[error("selected vertices are affinely dependent (scaled volume {0:e})")]
    DegenerateSimplex(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Which vertex-hunting pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VhMethod {
    Sp,
    Cvs,
    Svs0,
    SvsStar,
    SvsPlus,
}

/// Tunables for the sketching and denoising stages.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct VhParams {
    /// Number of k-means centers for `svs0`/`svs-star`. Default:
    /// `min(ceil(n/10), max(10k, 20))`, clamped to `[k, n]`. This default is
    /// an order-of-magnitude choice, not a tuned rule; override it when the
    /// cloud calls for it.
    pub sketch_size: Option<usize>,
    /// `svs-plus` drops a point unless at least this many other points sit
    /// within 5 percent of the cloud diameter.
    pub knn_min_neighbors: usize,
    /// `svs-plus` replaces each survivor by the mean of this many nearest
    /// survivors (itself included). Default `ceil(n/10)`; 1 keeps points
    /// unchanged.
    pub knn_average: Option<usize>,
}

impl Default for VhParams {
    fn default() -> Self {
        VhParams {
            sketch_size: None,
            knn_min_neighbors: 3,
            knn_average: None,
        }
    }
}

/// A recovered set of simplex corners plus selection diagnostics.
#[derive(Debug, Clone)]
pub struct VertexSet {
    /// `k x d`, rows sorted lexicographically.
    pub vertices: Array2<f64>,
    pub method: VhMethod,
    /// Points seen by the final selection stage (after sketching/denoising).
    pub candidate_count: usize,
    /// Maximum distance from the cloud the method was asked about to the
    /// convex hull of the returned vertices.
    pub max_residual: f64,
}

impl VertexSet {
    pub fn k(&self) -> usize {
        self.vertices.nrows()
    }

    pub fn dim(&self) -> usize {
        self.vertices.ncols()
    }
}

const COMBO_GUARD: f64 = 1e6;
const VOLUME_TOL: f64 = 1e-12;

/// Exact Euclidean distance from `point` to the convex hull of the rows of
/// `vertices`, by enumerating active sets: for the support of the true
/// minimizer the equality-constrained least squares (affine weights summing
/// to one) reproduces it, so the minimum over all feasible subsets is exact.
pub fn dist_to_hull(point: &ArrayView1<f64>, vertices: &ArrayView2<f64>) -> f64 {
    let k = vertices.nrows();
    let d = vertices.ncols();
    assert_eq!(point.len(), d, "point dimension must match vertices");
    assert!(k >= 1 && k <= 24, "hull distance supports 1..=24 vertices");
    let mut best = f64::INFINITY;
    for mask in 1u32..(1u32 << k) {
        let idx: Vec<usize> = (0..k).filter(|j| mask >> j & 1 == 1).collect();
        let s = idx.len();
        let mut m = nalgebra::DMatrix::zeros(s + 1, s + 1);
        let mut rhs = nalgebra::DVector::zeros(s + 1);
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                m[(a, b)] = (0..d).map(|c| vertices[[ia, c]] * vertices[[ib, c]]).sum();
            }
            m[(a, s)] = 1.0;
            m[(s, a)] = 1.0;
            rhs[a] = (0..d).map(|c| vertices[[ia, c]] * point[c]).sum();
        }
        rhs[s] = 1.0;
        let Some(sol) = m.lu().solve(&rhs) else {
            continue;
        };
        if (0..s).any(|a| sol[a] < -1e-12) {
            continue;
        }
        let mut dist2 = 0.0;
        for c in 0..d {
            let mut proj = 0.0;
            for (a, &ia) in idx.iter().enumerate() {
                proj += sol[a] * vertices[[ia, c]];
            }
            let diff = point[c] - proj;
            dist2 += diff * diff;
        }
        if dist2 < best {
            best = dist2;
        }
    }
    best.max(0.0).sqrt()
}

/// Simplex volume of the vertex rows after rescaling the diameter to one;
/// zero means affine dependence.
fn scaled_simplex_volume(vertices: &ArrayView2<f64>) -> f64 {
    let k = vertices.nrows();
    if k <= 1 {
        return 1.0;
    }
    let d = vertices.ncols();
    let mut diam2 = 0.0f64;
    for a in 0..k {
        for b in (a + 1)..k {
            let dist2: f64 = (0..d)
                .map(|c| (vertices[[a, c]] - vertices[[b, c]]).powi(2))
                .sum();
            diam2 = diam2.max(dist2);
        }
    }
    if diam2 <= 0.0 {
        return 0.0;
    }
    let mut gram = nalgebra::DMatrix::zeros(k - 1, k - 1);
    for a in 1..k {
        for b in 1..k {
            let g: f64 = (0..d)
                .map(|c| (vertices[[a, c]] - vertices[[0, c]]) * (vertices[[b, c]] - vertices[[0, c]]))
                .sum();
            gram[(a - 1, b - 1)] = g / diam2;
        }
    }
    let det = gram.determinant().max(0.0);
    let factorial: f64 = (1..k).map(|i| i as f64).product();
    det.sqrt() / factorial
}

fn sort_rows_lexicographic(rows: &mut Vec<Vec<f64>>) {
    rows.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            match x.partial_cmp(y).expect("coordinates are finite") {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    });
}

/// Package selected rows: sort, validate nondegeneracy, measure the cloud
/// residual.
fn assemble(
    selected: Vec<Vec<f64>>,
    method: VhMethod,
    candidate_count: usize,
    cloud: &ArrayView2<f64>,
) -> Result<VertexSet, VhError> {
    let k = selected.len();
    let d = selected.first().map_or(0, Vec::len);
    let mut rows = selected;
    sort_rows_lexicographic(&mut rows);
    let mut vertices = Array2::zeros((k, d));
    for (i, row) in rows.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            vertices[[i, j]] = x;
        }
    }
    let volume = scaled_simplex_volume(&vertices.view());
    if volume <= VOLUME_TOL {
        return Err(VhError::DegenerateSimplex(volume));
    }
    let residuals = par::map_indexed(cloud.nrows(), |i| {
        dist_to_hull(&cloud.row(i), &vertices.view())
    });
    let max_residual = residuals.into_iter().fold(0.0f64, f64::max);
    Ok(VertexSet {
        vertices,
        method,
        candidate_count,
        max_residual,
    })
}

/// Successive projection: repeatedly take the point with the largest
/// residual norm and project everything onto the orthogonal complement of
/// its direction.
///
/// Points are centered and lifted to homogeneous coordinates (a constant 1
/// appended) first, which turns the affine simplex into a cone and makes the
/// selection invariant to rigid motions of the input. The returned vertices
/// are original input rows, not their projections. With `k = 1` this is the
/// single point farthest from the centroid.
pub fn sp(points: &ArrayView2<f64>, k: usize) -> Result<VertexSet, VhError> {
    let picks = sp_indices(points, k)?;
    let rows: Vec<Vec<f64>> = picks.iter().map(|&i| points.row(i).to_vec()).collect();
    assemble(rows, VhMethod::Sp, points.nrows(), points)
}

fn sp_indices(points: &ArrayView2<f64>, k: usize) -> Result<Vec<usize>, VhError> {
    let (n, d) = points.dim();
    if k == 0 {
        return Err(VhError::InvalidParams("k must be at least 1".into()));
    }
    if n < k {
        return Err(VhError::TooFewPoints { n, k });
    }
    let mean: Array1<f64> = points.mean_axis(ndarray::Axis(0)).expect("n > 0");
    // centered homogeneous lift
    let mut resid = Array2::zeros((n, d + 1));
    for i in 0..n {
        for c in 0..d {
            resid[[i, c]] = points[[i, c]] - mean[c];
        }
        resid[[i, d]] = 1.0;
    }
    let initial_max = resid
        .rows()
        .into_iter()
        .map(|r| r.dot(&r))
        .fold(0.0f64, f64::max)
        .sqrt();
    let tol = initial_max * 1e-12;
    let mut picks = Vec::with_capacity(k);
    for _ in 0..k {
        let norms: Vec<f64> = par::map_indexed(n, |i| {
            let r = resid.row(i);
            r.dot(&r)
        });
        let (best_i, best_n2) = norms
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite").then(b.0.cmp(&a.0)))
            .expect("n > 0");
        if best_n2.sqrt() <= tol {
            return Err(VhError::RankDeficient(k));
        }
        picks.push(best_i);
        let dir = resid.row(best_i).to_owned() / best_n2.sqrt();
        for mut row in resid.rows_mut() {
            let c = row.dot(&dir);
            row.scaled_add(-c, &dir);
        }
    }
    Ok(picks)
}

/// Score every k-subset of the candidates and keep the one whose hull the
/// remaining candidates approach most closely.
///
/// The objective is the maximum distance from any non-selected candidate to
/// the hull of the subset; ties go to the larger simplex volume and then to
/// the earlier subset in lexicographic order. Guarded to at most 10^6
/// subsets.
pub fn combinatorial_select(
    candidates: &ArrayView2<f64>,
    k: usize,
) -> Result<VertexSet, VhError> {
    let set = combinatorial_core(candidates, k)?;
    Ok(set)
}

fn combinatorial_core(candidates: &ArrayView2<f64>, k: usize) -> Result<VertexSet, VhError> {
    let l = candidates.nrows();
    if k == 0 {
        return Err(VhError::InvalidParams("k must be at least 1".into()));
    }
    if l < k {
        return Err(VhError::TooFewPoints { n: l, k });
    }
    let combos = binomial_guarded(l, k);
    if combos > COMBO_GUARD {
        return Err(VhError::GuardExceeded { combos });
    }
    let n_combos = combos as usize;
    // flat lexicographic enumeration of all k-subsets
    let mut subsets = Vec::with_capacity(n_combos * k);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        subsets.extend_from_slice(&idx);
        // advance to the next combination
        let mut pos = k;
        while pos > 0 {
            pos -= 1;
            if idx[pos] != pos + l - k {
                idx[pos] += 1;
                for j in pos + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if pos == 0 {
                debug_assert_eq!(subsets.len(), n_combos * k);
                let scored = par::map_indexed(n_combos, |ci| {
                    let sub = &subsets[ci * k..(ci + 1) * k];
                    score_subset(candidates, sub)
                });
                let mut best_ci = 0usize;
                for ci in 1..n_combos {
                    let (score, vol) = scored[ci];
                    let (bscore, bvol) = scored[best_ci];
                    if score < bscore || (score == bscore && vol > bvol) {
                        best_ci = ci;
                    }
                }
                let sub = &subsets[best_ci * k..(best_ci + 1) * k];
                let rows: Vec<Vec<f64>> =
                    sub.iter().map(|&i| candidates.row(i).to_vec()).collect();
                return assemble(rows, VhMethod::Cvs, l, candidates);
            }
        }
    }
}

fn score_subset(candidates: &ArrayView2<f64>, sub: &[usize]) -> (f64, f64) {
    let d = candidates.ncols();
    let k = sub.len();
    let mut verts = Array2::zeros((k, d));
    for (a, &i) in sub.iter().enumerate() {
        verts.row_mut(a).assign(&candidates.row(i));
    }
    let mut worst = 0.0f64;
    let mut inside = vec![false; candidates.nrows()];
    for &i in sub {
        inside[i] = true;
    }
    for i in 0..candidates.nrows() {
        if inside[i] {
            continue;
        }
        let dist = dist_to_hull(&candidates.row(i), &verts.view());
        if dist > worst {
            worst = dist;
        }
    }
    (worst, scaled_simplex_volume(&verts.view()))
}

fn binomial_guarded(l: usize, k: usize) -> f64 {
    let k = k.min(l - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (l - i) as f64 / (i + 1) as f64;
        if acc > COMBO_GUARD * 10.0 {
            return acc;
        }
    }
    acc
}

fn default_sketch_size(n: usize, k: usize) -> usize {
    let by_n = n.div_ceil(10);
    by_n.min((10 * k).max(20)).clamp(k, n)
}

/// Run the selected vertex-hunting pipeline.
pub fn vertex_hunt(
    points: &ArrayView2<f64>,
    k: usize,
    method: VhMethod,
    params: &VhParams,
    seed: u64,
) -> Result<VertexSet, VhError> {
    let n = points.nrows();
    if n < k {
        return Err(VhError::TooFewPoints { n, k });
    }
    match method {
        VhMethod::Sp => sp(points, k),
        VhMethod::Cvs => combinatorial_select(points, k),
        VhMethod::Svs0 | VhMethod::SvsStar => {
            let l = params.sketch_size.unwrap_or_else(|| default_sketch_size(n, k));
            if l < k || l > n {
                return Err(VhError::InvalidParams(format!(
                    "sketch size {l} must lie in [k, n] = [{k}, {n}]"
                )));
            }
            let centers = kmeans(points, l, derive_seed(seed, "vh-sketch", 0), 10)?.centers;
            let mut set = if method == VhMethod::Svs0 {
                combinatorial_core(&centers.view(), k)?
            } else {
                let picks = sp_indices(&centers.view(), k)?;
                let rows: Vec<Vec<f64>> =
                    picks.iter().map(|&i| centers.row(i).to_vec()).collect();
                assemble(rows, method, l, &centers.view())?
            };
            // report the residual of the original cloud, not the sketch
            let residuals = par::map_indexed(n, |i| {
                dist_to_hull(&points.row(i), &set.vertices.view())
            });
            set.max_residual = residuals.into_iter().fold(0.0f64, f64::max);
            set.candidate_count = l;
            set.method = method;
            Ok(set)
        }
        VhMethod::SvsPlus => {
            let denoised = knn_denoise(points, params)?;
            let picks = sp_indices(&denoised.view(), k)?;
            let rows: Vec<Vec<f64>> = picks.iter().map(|&i| denoised.row(i).to_vec()).collect();
            let mut set = assemble(rows, VhMethod::SvsPlus, denoised.nrows(), points)?;
            set.candidate_count = denoised.nrows();
            Ok(set)
        }
    }
}

/// Density filter plus local averaging.
///
/// Drops points with fewer than `m` other points within 5 percent of the
/// cloud diameter, then replaces each survivor by the mean of its `N`
/// nearest survivors (itself included).
fn knn_denoise(points: &ArrayView2<f64>, params: &VhParams) -> Result<Array2<f64>, VhError> {
    let (n, d) = points.dim();
    let dist = |a: usize, b: usize| -> f64 {
        (0..d)
            .map(|c| (points[[a, c]] - points[[b, c]]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mut diam = 0.0f64;
    for a in 0..n {
        for b in (a + 1)..n {
            diam = diam.max(dist(a, b));
        }
    }
    let radius = 0.05 * diam;
    let m = params.knn_min_neighbors;
    let survivors: Vec<usize> = (0..n)
        .filter(|&a| {
            let close = (0..n).filter(|&b| b != a && dist(a, b) <= radius).count();
            close >= m
        })
        .collect();
    if survivors.is_empty() {
        return Err(VhError::AllPointsDropped);
    }
    let avg = params
        .knn_average
        .unwrap_or_else(|| n.div_ceil(10))
        .clamp(1, survivors.len());
    let rows = par::map_slice(&survivors, |&a| {
        // N nearest survivors including self, ties by index
        let mut order: Vec<usize> = survivors.clone();
        order.sort_by(|&x, &y| {
            dist(a, x)
                .partial_cmp(&dist(a, y))
                .expect("finite distances")
                .then(x.cmp(&y))
        });
        let mut mean = vec![0.0f64; d];
        for &b in order.iter().take(avg) {
            for (c, slot) in mean.iter_mut().enumerate() {
                *slot += points[[b, c]];
            }
        }
        for slot in mean.iter_mut() {
            *slot /= avg as f64;
        }
        mean
    });
    let mut out = Array2::zeros((survivors.len(), d));
    for (i, row) in rows.iter().enumerate() {
        for (c, &x) in row.iter().enumerate() {
            out[[i, c]] = x;
        }
    }
    Ok(out)
}
