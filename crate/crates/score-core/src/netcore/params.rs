use super::{Graph, NetError};
use crate::rng::rng_from_seed;
use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;

const PURE_TOL: f64 = 1e-12;

/// Parameters of a degree-corrected mixed-membership network model.
///
/// Node `i` carries a positive degree weight `theta[i]` and a membership
/// probability vector `pi.row(i)` over `k` communities; `p` is the symmetric
/// nonnegative community affinity matrix. The expected adjacency is
/// `Θ Π P Πᵀ Θ` with `Θ = diag(theta)`.
#[derive(Debug, Clone)]
pub struct DcmmParams {
    pub theta: Array1<f64>,
    pub pi: Array2<f64>,
    pub p: Array2<f64>,
}

impl DcmmParams {
    /// Validate shapes and value ranges, and construct.
    ///
    /// Checks: consistent dimensions, strictly positive `theta`, nonnegative
    /// `pi` rows summing to one within 1e-12, and symmetric nonnegative `p`.
    pub fn new(theta: Array1<f64>, pi: Array2<f64>, p: Array2<f64>) -> Result<Self, NetError> {
        let n = theta.len();
        let k = p.nrows();
        if pi.nrows() != n || pi.ncols() != k || p.ncols() != k {
            return Err(NetError::Dimensions(format!(
                "theta has {n} nodes, pi is {}x{}, p is {}x{}",
                pi.nrows(),
                pi.ncols(),
                p.nrows(),
                p.ncols()
            )));
        }
        if n == 0 || k == 0 {
            return Err(NetError::Dimensions("empty parameter set".into()));
        }
        if let Some((i, _)) = theta.iter().enumerate().find(|(_, &t)| !(t > 0.0)) {
            return Err(NetError::InvalidParams(format!(
                "theta[{i}] = {} is not strictly positive",
                theta[i]
            )));
        }
        for (i, row) in pi.rows().into_iter().enumerate() {
            if row.iter().any(|&x| x < 0.0) {
                return Err(NetError::InvalidParams(format!(
                    "membership row {i} has a negative entry"
                )));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > PURE_TOL {
                return Err(NetError::InvalidParams(format!(
                    "membership row {i} sums to {s}, not 1"
                )));
            }
        }
        for a in 0..k {
            for b in 0..k {
                if p[[a, b]] < 0.0 {
                    return Err(NetError::InvalidParams(format!(
                        "affinity entry ({a},{b}) is negative"
                    )));
                }
                if (p[[a, b]] - p[[b, a]]).abs() > PURE_TOL {
                    return Err(NetError::InvalidParams(
                        "affinity matrix is not symmetric".into(),
                    ));
                }
            }
        }
        Ok(DcmmParams { theta, pi, p })
    }

    pub fn node_count(&self) -> usize {
        self.theta.len()
    }

    pub fn community_count(&self) -> usize {
        self.p.nrows()
    }

    /// Indices of pure nodes per community: rows of `pi` that put all their
    /// mass (within 1e-12) on a single community.
    pub fn pure_nodes(&self) -> Vec<Vec<usize>> {
        let k = self.community_count();
        let mut out = vec![Vec::new(); k];
        for (i, row) in self.pi.rows().into_iter().enumerate() {
            for c in 0..k {
                if (row[c] - 1.0).abs() <= PURE_TOL {
                    out[c].push(i);
                }
            }
        }
        out
    }

    /// Check the identifiability normalization: `p` nonsingular with unit
    /// diagonal, and at least one pure node in every community.
    pub fn require_identifiable(&self) -> Result<(), NetError> {
        let k = self.community_count();
        for c in 0..k {
            if (self.p[[c, c]] - 1.0).abs() > PURE_TOL {
                return Err(NetError::NotIdentifiable(format!(
                    "affinity diagonal entry {c} is {}, expected 1",
                    self.p[[c, c]]
                )));
            }
        }
        let nm = nalgebra::DMatrix::from_fn(k, k, |i, j| self.p[[i, j]]);
        if !nm.lu().is_invertible() {
            return Err(NetError::NotIdentifiable(
                "affinity matrix is singular".into(),
            ));
        }
        for (c, pure) in self.pure_nodes().iter().enumerate() {
            if pure.is_empty() {
                return Err(NetError::NotIdentifiable(format!(
                    "community {c} has no pure node"
                )));
            }
        }
        Ok(())
    }
}

/// Expected adjacency `Θ Π P Πᵀ Θ` of the model.
///
/// The diagonal is kept by default; pass `zero_diagonal = true` to blank it
/// (matching the sampled graphs, which are hollow). The second component of
/// the return value flags whether any entry exceeds 1, in which case the
/// matrix is not a valid Bernoulli mean and sampling from it will fail.
pub fn expected_adjacency(params: &DcmmParams, zero_diagonal: bool) -> (Array2<f64>, bool) {
    let scaled = &params.pi * &params.theta.view().insert_axis(ndarray::Axis(1));
    let mut omega = scaled.dot(&params.p).dot(&scaled.t());
    if zero_diagonal {
        omega.diag_mut().fill(0.0);
    }
    let out_of_range = omega.iter().any(|&x| x > 1.0);
    (omega, out_of_range)
}

/// Sample a symmetric hollow Bernoulli graph with mean `omega`.
///
/// Upper-triangle entries (row-major order `i < j`) are drawn independently;
/// the diagonal of `omega` is ignored. Any off-diagonal entry outside `[0,1]`
/// is an error; values are never clipped.
pub fn sample_symmetric_bernoulli(omega: ArrayView2<f64>, seed: u64) -> Result<Graph, NetError> {
    let n = omega.nrows();
    if omega.ncols() != n {
        return Err(NetError::Dimensions(format!(
            "expected a square matrix, got {}x{}",
            n,
            omega.ncols()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = omega[[i, j]];
            if !(0.0..=1.0).contains(&p) {
                return Err(NetError::ProbabilityOutOfRange { i, j, value: p });
            }
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(Some(n), edges, false)
}

/// Sample a network from the model: Bernoulli upper triangle of the expected
/// adjacency, symmetrized, hollow, deterministic in `seed`.
pub fn sample_dcmm(params: &DcmmParams, seed: u64) -> Result<Graph, NetError> {
    let (omega, _) = expected_adjacency(params, false);
    sample_symmetric_bernoulli(omega.view(), seed)
}
