//! Seeded k-means: k-means++ starts, Lloyd iterations, empty-cluster repair,
//! best of several restarts.

use super::{ClusterError, ClusterResult};
use crate::par;
use crate::rng::{derive_seed, rng_from_seed};
use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;

const MAX_ITERS: usize = 100;
const REL_TOL: f64 = 1e-8;

fn dist2(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Cluster the rows of `points` into `k` groups.
///
/// Runs `restarts` independent k-means++ initializations followed by Lloyd
/// iterations (cap 100, relative tolerance 1e-8) and keeps the run with the
/// smallest inertia, ties going to the earlier restart. Empty clusters are
/// repaired by stealing the farthest point from the largest cluster, so
/// exactly `k` nonempty clusters come back. Deterministic given `seed`.
pub fn kmeans(
    points: &ArrayView2<f64>,
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<ClusterResult, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    let n = points.nrows();
    if n < k {
        return Err(ClusterError::TooFewPoints { n, k });
    }
    let restarts = restarts.max(1);
    let runs = par::map_indexed(restarts, |r| {
        lloyd_once(points, k, derive_seed(seed, "kmeans-restart", r as u64))
    });
    let best = runs
        .into_iter()
        .min_by(|a, b| {
            a.inertia
                .partial_cmp(&b.inertia)
                .expect("inertia is finite")
        })
        .expect("at least one restart");
    Ok(best)
}

fn lloyd_once(points: &ArrayView2<f64>, k: usize, seed: u64) -> ClusterResult {
    let (n, d) = points.dim();
    let mut rng = rng_from_seed(seed);
    let mut centers = plus_plus_init(points, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut prev_inertia = f64::INFINITY;
    let mut inertia = f64::INFINITY;
    for _ in 0..MAX_ITERS {
        let new_labels = assign(points, &centers);
        let changed = new_labels != labels;
        labels = new_labels;
        repair_empty(points, &centers, &mut labels, k);
        centers = means(points, &labels, k, d);
        inertia = cost(points, &centers, &labels);
        debug_assert!(
            inertia <= prev_inertia * (1.0 + 1e-12) + 1e-12,
            "Lloyd inertia went up: {prev_inertia} -> {inertia}"
        );
        if !changed || prev_inertia - inertia <= REL_TOL * prev_inertia {
            break;
        }
        prev_inertia = inertia;
    }
    ClusterResult {
        labels,
        centers,
        inertia,
        used_extra_eigenvector: None,
        off_support: None,
    }
}

/// k-means++ seeding: first center uniform, then proportional to squared
/// distance from the nearest chosen center.
fn plus_plus_init(
    points: &ArrayView2<f64>,
    k: usize,
    rng: &mut crate::rng::SeededRng,
) -> Array2<f64> {
    let (n, d) = points.dim();
    let mut centers = Array2::zeros((k, d));
    let first = rng.gen_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let mut best_d2: Vec<f64> = (0..n)
        .map(|i| dist2(points.row(i), centers.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = best_d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut cum = 0.0;
            let mut pick = n - 1;
            for (i, &w) in best_d2.iter().enumerate() {
                cum += w;
                if cum > target {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // all remaining points coincide with chosen centers
            rng.gen_range(0..n)
        };
        centers.row_mut(c).assign(&points.row(pick));
        for i in 0..n {
            let d2 = dist2(points.row(i), centers.row(c));
            if d2 < best_d2[i] {
                best_d2[i] = d2;
            }
        }
    }
    centers
}

/// Nearest-center labels, ties to the lower center index.
fn assign(points: &ArrayView2<f64>, centers: &Array2<f64>) -> Vec<usize> {
    let k = centers.nrows();
    par::map_indexed(points.nrows(), |i| {
        let p = points.row(i);
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let d = dist2(p, centers.row(c));
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        best
    })
}

/// Give every empty cluster the farthest point of the currently largest
/// cluster.
fn repair_empty(points: &ArrayView2<f64>, centers: &Array2<f64>, labels: &mut [usize], k: usize) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let donor = counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(c, _)| c)
            .expect("k > 0");
        let mut far_i = usize::MAX;
        let mut far_d = -1.0f64;
        for (i, &l) in labels.iter().enumerate() {
            if l != donor {
                continue;
            }
            let d = dist2(points.row(i), centers.row(donor));
            if d > far_d {
                far_d = d;
                far_i = i;
            }
        }
        labels[far_i] = empty;
        counts[donor] -= 1;
        counts[empty] += 1;
    }
}

fn means(points: &ArrayView2<f64>, labels: &[usize], k: usize, d: usize) -> Array2<f64> {
    let mut centers = Array2::zeros((k, d));
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        let mut row = centers.row_mut(l);
        row += &points.row(i);
    }
    for (c, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            let mut row = centers.row_mut(c);
            row /= cnt as f64;
        }
    }
    centers
}

fn cost(points: &ArrayView2<f64>, centers: &Array2<f64>, labels: &[usize]) -> f64 {
    // per-point costs in index order, summed sequentially so parallel and
    // sequential builds agree bitwise
    par::map_indexed(points.nrows(), |i| {
        dist2(points.row(i), centers.row(labels[i]))
    })
    .into_iter()
    .sum()
}
