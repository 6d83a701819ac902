//! Spectral topic modeling: Topic-SCORE estimation of the word-topic matrix
//! and per-document topic weights from a bag-of-words corpus, anchor-word
//! diagnostics, and likelihood-based topic ranking from citation exchanges.

use crate::netcore::Corpus;
use crate::par;
use crate::spectra::{raw_ratios, ratio_normalize_columns, svd_top, SpectraError, ThresholdRule};
use crate::vertexhunt::{vertex_hunt, VertexSet, VhError, VhMethod, VhParams};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView2};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("{kept} usable words for {k} topics")]
    TooFewWords { kept: usize, k: usize },
    #[error("requested {k} topics but the frequency matrix has numerical rank below that")]
    RankDeficient { k: usize },
    #[error("topic {0} received no mass; the simplex fit is degenerate")]
    DegenerateTopic(usize),
    #[error("singular linear system while {0}")]
    SingularSystem(&'static str),
    #[error("citation list is empty")]
    NoCitations,
    #[error("pair {index} references document {doc}, but only {n} documents exist")]
    DocOutOfRange { index: usize, doc: usize, n: usize },
    #[error("pair {0} is a self-citation")]
    SelfCitation(usize),
    #[error("complete separation: the likelihood increases without bound along {direction:?}")]
    Separation { direction: Vec<f64> },
    #[error("Newton stalled at gradient norm {grad_norm:.3e} after {iterations} steps")]
    NotConverged { grad_norm: f64, iterations: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    VertexHunt(#[from] VhError),
}

/// Knobs for [`topic_score`].
#[derive(Debug, Clone)]
pub struct TopicOptions {
    pub vh_method: VhMethod,
    pub vh_params: VhParams,
    /// Cap on the ratio magnitudes. `None` (the default) keeps the raw
    /// ratios; pass a rule (for instance `Fixed(ln p)`) to guard against
    /// near-zero leading-vector entries on noisy corpora.
    pub truncate: Option<ThresholdRule>,
    /// Work with the document-side (right singular vector) simplex instead
    /// of the word-side one. This estimates the weights first and recovers
    /// topics by least squares, and it is only trustworthy when every topic
    /// has some pure documents; anchor words are the weaker and usually more
    /// realistic requirement, so the word-side default is preferred.
    pub doc_space: bool,
}

impl Default for TopicOptions {
    fn default() -> Self {
        TopicOptions {
            vh_method: VhMethod::SvsPlus,
            vh_params: VhParams::default(),
            truncate: None,
            doc_space: false,
        }
    }
}

/// Fitted topic model.
#[derive(Debug, Clone)]
pub struct TopicEstimate {
    /// `p x k`; every column is a PMF over the vocabulary. Rows of dropped
    /// words are zero.
    pub a_hat: Array2<f64>,
    /// `k x n`; every column is a PMF over topics.
    pub w_hat: Array2<f64>,
    /// Simplex corners found in ratio space.
    pub vertices: VertexSet,
    /// Words removed for zero total frequency.
    pub dropped_words: Vec<usize>,
}

impl TopicEstimate {
    pub fn word_count(&self) -> usize {
        self.a_hat.nrows()
    }

    pub fn topic_count(&self) -> usize {
        self.a_hat.ncols()
    }

    pub fn doc_count(&self) -> usize {
        self.w_hat.ncols()
    }
}

/// Estimate topics and weights from word frequencies.
///
/// The frequency matrix is row-normalized by `M = diag(D 1_n)`, the top `k`
/// singular vectors of `M^{-1/2} D` are ratio-normalized against the leading
/// vector, a vertex hunt on the ratio rows finds the simplex corners, and
/// per-word convex weights are mapped back to word space:
/// `G = M^{1/2} diag(xi_1) [alpha_1 .. alpha_p]'`, whose normalized columns
/// form `a_hat`. Weights follow by generalized least squares
/// `(A' M^-1 A)^-1 A' M^-1 D` with negatives zeroed and columns renormalized.
pub fn topic_score(
    corpus: &Corpus,
    k: usize,
    options: &TopicOptions,
    seed: u64,
) -> Result<TopicEstimate, TopicError> {
    let d = corpus.frequencies();
    let (p, n) = d.dim();
    if k == 0 {
        return Err(TopicError::InvalidParams("need at least one topic".into()));
    }
    if k > n {
        return Err(TopicError::InvalidParams(format!(
            "{k} topics for {n} documents"
        )));
    }
    let totals: Vec<f64> = (0..p).map(|j| d.row(j).sum()).collect();
    let kept: Vec<usize> = (0..p).filter(|&j| totals[j] > 0.0).collect();
    let dropped_words: Vec<usize> = (0..p).filter(|&j| totals[j] <= 0.0).collect();
    if kept.len() < k {
        return Err(TopicError::TooFewWords {
            kept: kept.len(),
            k,
        });
    }
    if k == 1 {
        return Ok(rank_one_estimate(&d, &totals, &kept, dropped_words, options));
    }
    let mass: Vec<f64> = kept.iter().map(|&j| totals[j]).collect();
    let x = Array2::from_shape_fn((kept.len(), n), |(r, i)| d[[kept[r], i]] / mass[r].sqrt());
    let svd = svd_top(&x.view(), k)?;
    if svd.singular_values[k - 1] <= 1e-12 * svd.singular_values[0] {
        return Err(TopicError::RankDeficient { k });
    }

    if options.doc_space {
        return doc_space_estimate(&d, &svd.right.view(), k, dropped_words, options, seed);
    }

    let ratios = ratio_rows(&svd.left.view(), options.truncate)?;
    let vertices = vertex_hunt(&ratios.view(), k, options.vh_method, &options.vh_params, seed)?;
    // barycentric weights of every ratio row, then the word-space pull-back
    let mut lifted = Array2::ones((kept.len(), k));
    lifted.slice_mut(ndarray::s![.., 1..]).assign(&ratios);
    let coeffs = vertex_basis_solve(&lifted.view(), &vertices.vertices.view())?;
    let alpha = par::map_indexed(kept.len(), |r| clip_to_pmf(&coeffs.row(r).to_vec()));
    let mut a_hat = Array2::zeros((p, k));
    for (r, &j) in kept.iter().enumerate() {
        let scale = mass[r].sqrt() * svd.left[[r, 0]].max(0.0);
        for t in 0..k {
            a_hat[[j, t]] = scale * alpha[r][t];
        }
    }
    normalize_topic_columns(&mut a_hat)?;

    // w* = (a' M^-1 a)^-1 a' M^-1 d on the kept rows
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DMatrix::<f64>::zeros(k, n);
    for (r, &j) in kept.iter().enumerate() {
        let inv_m = 1.0 / mass[r];
        for s in 0..k {
            let as_j = a_hat[[j, s]];
            if as_j == 0.0 {
                continue;
            }
            for t in 0..k {
                gram[(s, t)] += as_j * a_hat[[j, t]] * inv_m;
            }
            for i in 0..n {
                rhs[(s, i)] += as_j * d[[j, i]] * inv_m;
            }
        }
    }
    let solved = gram
        .lu()
        .solve(&rhs)
        .ok_or(TopicError::SingularSystem("inverting the topic Gram matrix"))?;
    let w_cols = par::map_indexed(n, |i| {
        let col: Vec<f64> = (0..k).map(|t| solved[(t, i)]).collect();
        clip_to_pmf(&col)
    });
    let mut w_hat = Array2::zeros((k, n));
    for (i, col) in w_cols.iter().enumerate() {
        for t in 0..k {
            w_hat[[t, i]] = col[t];
        }
    }
    Ok(TopicEstimate {
        a_hat,
        w_hat,
        vertices,
        dropped_words,
    })
}

fn ratio_rows(
    columns: &ArrayView2<f64>,
    truncate: Option<ThresholdRule>,
) -> Result<Array2<f64>, TopicError> {
    Ok(match truncate {
        None => raw_ratios(columns),
        Some(rule) => ratio_normalize_columns(columns, rule)?.r,
    })
}

fn rank_one_estimate(
    d: &ArrayView2<f64>,
    totals: &[f64],
    kept: &[usize],
    dropped_words: Vec<usize>,
    options: &TopicOptions,
) -> TopicEstimate {
    let (p, n) = d.dim();
    let grand: f64 = totals.iter().sum();
    let mut a_hat = Array2::zeros((p, 1));
    for j in 0..p {
        a_hat[[j, 0]] = totals[j] / grand;
    }
    TopicEstimate {
        a_hat,
        w_hat: Array2::ones((1, n)),
        vertices: VertexSet {
            vertices: Array2::zeros((1, 0)),
            method: options.vh_method,
            candidate_count: if options.doc_space { n } else { kept.len() },
            max_residual: 0.0,
        },
        dropped_words,
    }
}

/// Document-side variant: hunt the simplex spanned by the right singular
/// vectors, read off per-document weights, then recover topics from
/// `D ~ a_hat w_hat` by least squares.
fn doc_space_estimate(
    d: &ArrayView2<f64>,
    right: &ArrayView2<f64>,
    k: usize,
    dropped_words: Vec<usize>,
    options: &TopicOptions,
    seed: u64,
) -> Result<TopicEstimate, TopicError> {
    let (p, n) = d.dim();
    let ratios = ratio_rows(right, options.truncate)?;
    let vertices = vertex_hunt(&ratios.view(), k, options.vh_method, &options.vh_params, seed)?;
    // right-vector rows factor as w_i' diag(b) [1 | U]; undo the vertex part,
    // then fix the per-topic scales b by requiring weights to sum to one
    let coeffs = vertex_basis_solve(right, &vertices.vertices.view())?;
    let c = DMatrix::from_fn(n, k, |i, t| coeffs[[i, t]]);
    let normal = c.transpose() * &c;
    let target = c.transpose() * DVector::from_element(n, 1.0);
    let scales = normal
        .lu()
        .solve(&target)
        .ok_or(TopicError::SingularSystem("calibrating document weights"))?;
    let w_cols = par::map_indexed(n, |i| {
        let col: Vec<f64> = (0..k).map(|t| coeffs[[i, t]] * scales[t]).collect();
        clip_to_pmf(&col)
    });
    let mut w_hat = Array2::zeros((k, n));
    for (i, col) in w_cols.iter().enumerate() {
        for t in 0..k {
            w_hat[[t, i]] = col[t];
        }
    }
    // a* = d w' (w w')^-1; zero-frequency rows of d stay zero automatically
    let w_na = DMatrix::from_fn(k, n, |t, i| w_hat[[t, i]]);
    let ww = &w_na * w_na.transpose();
    let dw = DMatrix::from_fn(p, k, |j, t| {
        (0..n).map(|i| d[[j, i]] * w_na[(t, i)]).sum::<f64>()
    });
    let lu = ww
        .lu()
        .solve(&dw.transpose())
        .ok_or(TopicError::SingularSystem("inverting the weight Gram matrix"))?;
    let mut a_hat = Array2::zeros((p, k));
    for j in 0..p {
        for t in 0..k {
            a_hat[[j, t]] = lu[(t, j)];
        }
    }
    normalize_topic_columns(&mut a_hat)?;
    Ok(TopicEstimate {
        a_hat,
        w_hat,
        vertices,
        dropped_words,
    })
}

/// Solve `X [1 | V] = rows` for `X`, one row per input row; the first output
/// column carries the affine part, the rest the vertex weights.
fn vertex_basis_solve(
    rows: &ArrayView2<f64>,
    vertices: &ArrayView2<f64>,
) -> Result<Array2<f64>, TopicError> {
    let (q, k) = rows.dim();
    debug_assert_eq!(k, vertices.nrows());
    let lifted = DMatrix::from_fn(k, k, |r, c| {
        if c == 0 {
            1.0
        } else {
            vertices[[r, c - 1]]
        }
    });
    let rhs = DMatrix::from_fn(k, q, |r, c| rows[[c, r]]);
    let solved = lifted
        .transpose()
        .lu()
        .solve(&rhs)
        .ok_or(TopicError::SingularSystem("solving the vertex basis"))?;
    Ok(Array2::from_shape_fn((q, k), |(i, t)| solved[(t, i)]))
}

fn clip_to_pmf(values: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = values.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        // cannot happen when the inputs sum to one, but keep a safe fallback
        return vec![1.0 / values.len() as f64; values.len()];
    }
    clipped.iter().map(|&x| x / total).collect()
}

fn normalize_topic_columns(a: &mut Array2<f64>) -> Result<(), TopicError> {
    for t in 0..a.ncols() {
        let mut col = a.column_mut(t);
        col.mapv_inplace(|x| x.max(0.0));
        let total: f64 = col.sum();
        if total <= 0.0 {
            return Err(TopicError::DegenerateTopic(t));
        }
        col.mapv_inplace(|x| x / total);
    }
    Ok(())
}

/// One candidate anchor word with its exclusivity score.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AnchorWord {
    pub word: usize,
    /// `a_j(topic) - max over other topics of a_j`, where `a_j` is the word's
    /// row profile normalized to sum one; 1 for a perfect anchor, 0 when the
    /// word is spread evenly.
    pub score: f64,
}

/// Ranked anchor candidates per topic.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AnchorReport {
    pub per_topic: Vec<Vec<AnchorWord>>,
    /// Set when no topic has a candidate scoring above 0.1, which means the
    /// fit found no word that is even mildly exclusive to a topic.
    pub anchor_free: bool,
}

/// Rank words by how exclusively they load on each topic and keep the
/// `top_m` best per topic.
pub fn anchor_diagnostics(estimate: &TopicEstimate, top_m: usize) -> AnchorReport {
    let (p, k) = estimate.a_hat.dim();
    let mut per_topic: Vec<Vec<AnchorWord>> = vec![Vec::new(); k];
    for j in 0..p {
        let row = estimate.a_hat.row(j);
        let total: f64 = row.sum();
        if total <= 0.0 {
            continue;
        }
        for t in 0..k {
            let own = row[t] / total;
            let rival = (0..k)
                .filter(|&l| l != t)
                .map(|l| row[l] / total)
                .fold(0.0f64, f64::max);
            per_topic[t].push(AnchorWord {
                word: j,
                score: own - rival,
            });
        }
    }
    let mut anchor_free = true;
    for list in &mut per_topic {
        list.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("scores are finite")
                .then(a.word.cmp(&b.word))
        });
        if list.first().is_some_and(|best| best.score > 0.1) {
            anchor_free = false;
        }
        list.truncate(top_m);
    }
    AnchorReport {
        per_topic,
        anchor_free,
    }
}

/// Who cites whom, with optional exchange multiplicities.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CitationPairs {
    pairs: Vec<(usize, usize)>,
    counts: Option<Vec<u64>>,
}

impl CitationPairs {
    /// Each pair reads `(citing, cited)`. Self-citations are rejected; when
    /// `counts` is given it must match the pair list and hold positive
    /// multiplicities.
    pub fn new(pairs: Vec<(usize, usize)>, counts: Option<Vec<u64>>) -> Result<Self, TopicError> {
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            if i == j {
                return Err(TopicError::SelfCitation(idx));
            }
        }
        if let Some(c) = &counts {
            if c.len() != pairs.len() {
                return Err(TopicError::InvalidParams(format!(
                    "{} counts for {} pairs",
                    c.len(),
                    pairs.len()
                )));
            }
            if let Some(zero) = c.iter().position(|&x| x == 0) {
                return Err(TopicError::InvalidParams(format!(
                    "pair {zero} has a zero count"
                )));
            }
        }
        Ok(CitationPairs { pairs, counts })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn count(&self, idx: usize) -> u64 {
        self.counts.as_ref().map_or(1, |c| c[idx])
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Topic export estimate from citation directions.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TrScore {
    /// Export strength per topic, centered to sum to zero.
    pub mu_hat: Vec<f64>,
    /// Topics ordered by descending export (ties by index).
    pub ranking: Vec<usize>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub log_likelihood: f64,
}

const TR_GRAD_TOL: f64 = 1e-9;
const TR_MAX_ITER: usize = 200;
/// An exchange fitted beyond these log-odds is treated as deterministic,
/// which signals a diverging likelihood rather than a finite optimum.
const TR_SEPARATION_ODDS: f64 = 15.0;

/// Fit the directed-citation model: given an exchange between documents `i`
/// and `j`, the chance that `i` is the one citing is
/// `sigmoid(mu' (w_i - w_j))`. The log-likelihood is maximized by Newton
/// ascent over the sum-zero subspace (the model only identifies `mu` up to a
/// shift because weight vectors sum to one), and topics are ranked by the
/// fitted exports.
pub fn tr_score(w_hat: &ArrayView2<f64>, citations: &CitationPairs) -> Result<TrScore, TopicError> {
    let (k, n) = w_hat.dim();
    if citations.is_empty() {
        return Err(TopicError::NoCitations);
    }
    for (idx, &(i, j)) in citations.pairs().iter().enumerate() {
        for doc in [i, j] {
            if doc >= n {
                return Err(TopicError::DocOutOfRange { index: idx, doc, n });
            }
        }
    }
    if k == 1 {
        let weight: f64 = (0..citations.len()).map(|e| citations.count(e) as f64).sum();
        return Ok(TrScore {
            mu_hat: vec![0.0],
            ranking: vec![0],
            grad_norm: 0.0,
            iterations: 0,
            log_likelihood: weight * 0.5f64.ln(),
        });
    }
    let r = k - 1;
    // reduced coordinates: mu = [nu; 0] + shift, so mu' z = nu' z_tilde with
    // z_tilde_m = z_m - z_K
    let mut reduced: Vec<(Vec<f64>, f64)> = Vec::with_capacity(citations.len());
    for (e, &(i, j)) in citations.pairs().iter().enumerate() {
        let zk = w_hat[[r, i]] - w_hat[[r, j]];
        let z: Vec<f64> = (0..r)
            .map(|m| w_hat[[m, i]] - w_hat[[m, j]] - zk)
            .collect();
        reduced.push((z, citations.count(e) as f64));
    }
    let mut nu = DVector::<f64>::zeros(r);
    let mut iterations = 0;
    loop {
        let mut grad = DVector::<f64>::zeros(r);
        let mut hess = DMatrix::<f64>::zeros(r, r);
        let mut log_likelihood = 0.0;
        let mut max_odds = 0.0f64;
        for (z, c) in &reduced {
            let u: f64 = (0..r).map(|m| nu[m] * z[m]).sum();
            max_odds = max_odds.max(u.abs());
            let sigma = 1.0 / (1.0 + (-u).exp());
            log_likelihood -= c * softplus(-u);
            let pull = c * (1.0 - sigma);
            let curve = c * sigma * (1.0 - sigma);
            for m in 0..r {
                grad[m] += pull * z[m];
                for l in 0..r {
                    hess[(m, l)] += curve * z[m] * z[l];
                }
            }
        }
        let grad_norm = grad.norm();
        if grad_norm <= TR_GRAD_TOL {
            if max_odds > TR_SEPARATION_ODDS {
                return Err(TopicError::Separation {
                    direction: separation_direction(&nu),
                });
            }
            let mu_hat = expand(&nu);
            let mut ranking: Vec<usize> = (0..k).collect();
            ranking.sort_by(|&a, &b| {
                mu_hat[b]
                    .partial_cmp(&mu_hat[a])
                    .expect("exports are finite")
                    .then(a.cmp(&b))
            });
            return Ok(TrScore {
                mu_hat,
                ranking,
                grad_norm,
                iterations,
                log_likelihood,
            });
        }
        if iterations >= TR_MAX_ITER {
            return Err(TopicError::NotConverged {
                grad_norm,
                iterations,
            });
        }
        for m in 0..r {
            hess[(m, m)] += 1e-12;
        }
        let mut step = hess
            .lu()
            .solve(&grad)
            .ok_or(TopicError::SingularSystem("taking a Newton step"))?;
        let len = step.norm();
        if len > 10.0 {
            step *= 10.0 / len;
        }
        nu += step;
        iterations += 1;
        if nu.amax() > 100.0 {
            return Err(TopicError::Separation {
                direction: separation_direction(&nu),
            });
        }
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Complete `nu` to the full export vector: the basis is `e_m - e_K`, so the
/// last coordinate balances the rest and the result sums to zero.
fn expand(nu: &DVector<f64>) -> Vec<f64> {
    let mut mu: Vec<f64> = nu.iter().copied().collect();
    mu.push(-nu.sum());
    mu
}

fn separation_direction(nu: &DVector<f64>) -> Vec<f64> {
    let mu = expand(nu);
    let norm: f64 = mu.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= 0.0 {
        return mu;
    }
    mu.into_iter().map(|x| x / norm).collect()
}
