//! Synthetic model builders used by benchmarks, tests, and the CLI generator.

use super::{DcmmParams, NetError, PlsiParams};
use crate::rng::rng_from_seed;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// How node degree weights are drawn.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThetaSpec {
    /// Every node gets the same weight.
    Fixed { value: f64 },
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// Reciprocal of a Uniform on `[lo, hi]` draw (heavy degree heterogeneity).
    InverseUniform { lo: f64, hi: f64 },
}

impl ThetaSpec {
    pub fn sample(&self, n: usize, seed: u64) -> Result<Array1<f64>, NetError> {
        let mut rng = rng_from_seed(seed);
        let draw = |rng: &mut crate::rng::SeededRng| -> Result<f64, NetError> {
            match *self {
                ThetaSpec::Fixed { value } => {
                    if value <= 0.0 {
                        return Err(NetError::InvalidParams(
                            "fixed theta must be positive".into(),
                        ));
                    }
                    Ok(value)
                }
                ThetaSpec::Uniform { lo, hi } => {
                    if !(0.0 < lo && lo <= hi) {
                        return Err(NetError::InvalidParams(
                            "uniform theta bounds must satisfy 0 < lo <= hi".into(),
                        ));
                    }
                    Ok(rng.gen_range(lo..=hi))
                }
                ThetaSpec::InverseUniform { lo, hi } => {
                    if !(0.0 < lo && lo <= hi) {
                        return Err(NetError::InvalidParams(
                            "inverse-uniform theta bounds must satisfy 0 < lo <= hi".into(),
                        ));
                    }
                    Ok(1.0 / rng.gen_range(lo..=hi))
                }
            }
        };
        let mut out = Array1::zeros(n);
        for i in 0..n {
            out[i] = draw(&mut rng)?;
        }
        Ok(out)
    }
}

/// Block-model affinity: `within` on the diagonal, `between` off it.
pub fn block_affinity(k: usize, within: f64, between: f64) -> Array2<f64> {
    Array2::from_shape_fn((k, k), |(a, b)| if a == b { within } else { between })
}

/// A degree-corrected block model with near-equal community sizes.
///
/// Returns the parameters and the planted community label per node. Nodes are
/// laid out community by community; the first `n % k` communities get the
/// extra node when `n` is not divisible by `k`.
pub fn dcbm_instance(
    n: usize,
    k: usize,
    within: f64,
    between: f64,
    theta: ThetaSpec,
    seed: u64,
) -> Result<(DcmmParams, Vec<usize>), NetError> {
    if k == 0 || n < k {
        return Err(NetError::InvalidParams(format!(
            "need at least one node per community (n = {n}, k = {k})"
        )));
    }
    let base = n / k;
    let extra = n % k;
    let mut labels = Vec::with_capacity(n);
    for c in 0..k {
        let size = base + usize::from(c < extra);
        labels.extend(std::iter::repeat(c).take(size));
    }
    let mut pi = Array2::zeros((n, k));
    for (i, &c) in labels.iter().enumerate() {
        pi[[i, c]] = 1.0;
    }
    let params = DcmmParams::new(
        theta.sample(n, seed)?,
        pi,
        block_affinity(k, within, between),
    )?;
    Ok((params, labels))
}

/// A group of documents/nodes whose membership rows are Dirichlet draws.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct DirichletGroup {
    pub count: usize,
    pub alpha: Vec<f64>,
}

/// Specification of a mixed-membership instance: a block of pure nodes per
/// community followed by Dirichlet-mixed groups.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MixedInstanceSpec {
    pub k: usize,
    pub within: f64,
    pub between: f64,
    pub pure_per_community: usize,
    pub groups: Vec<DirichletGroup>,
    pub theta: ThetaSpec,
}

/// Build the mixed-membership instance; returns parameters and the true
/// membership matrix (`n x k`).
pub fn mixed_instance(
    spec: &MixedInstanceSpec,
    seed: u64,
) -> Result<(DcmmParams, Array2<f64>), NetError> {
    let k = spec.k;
    if k == 0 || spec.pure_per_community == 0 {
        return Err(NetError::InvalidParams(
            "need k >= 1 and at least one pure node per community".into(),
        ));
    }
    let n_mixed: usize = spec.groups.iter().map(|g| g.count).sum();
    let n = k * spec.pure_per_community + n_mixed;
    let mut pi = Array2::zeros((n, k));
    let mut row = 0;
    for c in 0..k {
        for _ in 0..spec.pure_per_community {
            pi[[row, c]] = 1.0;
            row += 1;
        }
    }
    let mut rng = rng_from_seed(crate::rng::derive_seed(seed, "mixed-dirichlet", 0));
    for group in &spec.groups {
        if group.alpha.len() != k {
            return Err(NetError::Dimensions(format!(
                "dirichlet alpha has {} entries for k = {k}",
                group.alpha.len()
            )));
        }
        for _ in 0..group.count {
            let mut draws = vec![0.0f64; k];
            let mut total = 0.0;
            for (c, &a) in group.alpha.iter().enumerate() {
                let g = Gamma::new(a, 1.0).map_err(|e| {
                    NetError::InvalidParams(format!("bad dirichlet parameter {a}: {e}"))
                })?;
                let x: f64 = g.sample(&mut rng);
                draws[c] = x;
                total += x;
            }
            for c in 0..k {
                pi[[row, c]] = draws[c] / total;
            }
            row += 1;
        }
    }
    let theta = spec.theta.sample(n, crate::rng::derive_seed(seed, "mixed-theta", 0))?;
    let params = DcmmParams::new(theta, pi.clone(), block_affinity(k, spec.within, spec.between))?;
    Ok((params, pi))
}

/// Specification of a topic-model instance with planted anchor words.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct PlsiInstanceSpec {
    pub k: usize,
    /// Words that belong exclusively to one topic, per topic.
    pub anchors_per_topic: usize,
    /// Additional words shared across all topics.
    pub shared_words: usize,
    /// Documents that are pure in one topic, per topic.
    pub pure_docs_per_topic: usize,
    /// Mixed documents drawn from a symmetric Dirichlet with this parameter.
    pub mixed_docs: usize,
    pub dirichlet_alpha: f64,
}

/// Build a topic model with anchor words and pure documents.
pub fn plsi_instance(spec: &PlsiInstanceSpec, seed: u64) -> Result<PlsiParams, NetError> {
    let k = spec.k;
    if k == 0 || spec.anchors_per_topic == 0 {
        return Err(NetError::InvalidParams(
            "need k >= 1 and at least one anchor word per topic".into(),
        ));
    }
    let p = k * spec.anchors_per_topic + spec.shared_words;
    let n = k * spec.pure_docs_per_topic + spec.mixed_docs;
    if n == 0 {
        return Err(NetError::InvalidParams("no documents requested".into()));
    }
    let mut rng = rng_from_seed(crate::rng::derive_seed(seed, "plsi-instance", 0));
    let mut a = Array2::zeros((p, k));
    for topic in 0..k {
        // anchor block: word j exclusive to its topic
        for s in 0..spec.anchors_per_topic {
            let word = topic * spec.anchors_per_topic + s;
            a[[word, topic]] = rng.gen_range(0.5..1.5);
        }
        for s in 0..spec.shared_words {
            let word = k * spec.anchors_per_topic + s;
            a[[word, topic]] = rng.gen_range(0.1..1.1);
        }
        let total: f64 = a.column(topic).sum();
        a.column_mut(topic).mapv_inplace(|x| x / total);
    }
    let mut w = Array2::zeros((k, n));
    let mut col = 0;
    for topic in 0..k {
        for _ in 0..spec.pure_docs_per_topic {
            w[[topic, col]] = 1.0;
            col += 1;
        }
    }
    let gamma = Gamma::new(spec.dirichlet_alpha, 1.0)
        .map_err(|e| NetError::InvalidParams(format!("bad dirichlet alpha: {e}")))?;
    for _ in 0..spec.mixed_docs {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        for topic in 0..k {
            w[[topic, col]] = draws[topic] / total;
        }
        col += 1;
    }
    PlsiParams::new(a, w)
}
