use super::NetError;
use crate::rng::rng_from_seed;
use ndarray::{Array2, ArrayView2};
use rand_distr::{Binomial, Distribution};
use std::io::BufRead;
use std::path::Path;

const COL_TOL: f64 = 1e-12;

/// A bag-of-words corpus: per-document word frequencies plus lengths.
///
/// `d` is `p x n` (vocabulary by documents); every column is a probability
/// vector (sums to one within 1e-12). `lengths[i]` is the word count of
/// document `i`, so `d.column(i) * lengths[i]` recovers raw counts.
#[derive(Debug, Clone)]
pub struct Corpus {
    d: Array2<f64>,
    lengths: Vec<u64>,
    vocab: Option<Vec<String>>,
}

impl Corpus {
    /// Build from raw counts (`p x n`); every document needs at least one word.
    pub fn from_counts(counts: ArrayView2<u64>, vocab: Option<Vec<String>>) -> Result<Self, NetError> {
        let (p, n) = counts.dim();
        if p == 0 || n == 0 {
            return Err(NetError::Dimensions("empty corpus".into()));
        }
        if let Some(v) = &vocab {
            if v.len() != p {
                return Err(NetError::Dimensions(format!(
                    "vocabulary has {} tokens but counts have {p} rows",
                    v.len()
                )));
            }
        }
        let mut d = Array2::zeros((p, n));
        let mut lengths = Vec::with_capacity(n);
        for i in 0..n {
            let total: u64 = counts.column(i).sum();
            if total == 0 {
                return Err(NetError::ZeroLengthDocument(i));
            }
            for j in 0..p {
                d[[j, i]] = counts[[j, i]] as f64 / total as f64;
            }
            lengths.push(total);
        }
        Ok(Corpus { d, lengths, vocab })
    }

    /// Build directly from a frequency matrix whose columns already sum to 1.
    pub fn from_frequencies(
        d: Array2<f64>,
        lengths: Vec<u64>,
        vocab: Option<Vec<String>>,
    ) -> Result<Self, NetError> {
        let (p, n) = d.dim();
        if p == 0 || n == 0 {
            return Err(NetError::Dimensions("empty corpus".into()));
        }
        if lengths.len() != n {
            return Err(NetError::Dimensions(format!(
                "{} lengths for {n} documents",
                lengths.len()
            )));
        }
        if let Some(v) = &vocab {
            if v.len() != p {
                return Err(NetError::Dimensions(format!(
                    "vocabulary has {} tokens but frequencies have {p} rows",
                    v.len()
                )));
            }
        }
        for i in 0..n {
            let s: f64 = d.column(i).sum();
            if (s - 1.0).abs() > COL_TOL || d.column(i).iter().any(|&x| x < 0.0) {
                return Err(NetError::InvalidParams(format!(
                    "frequency column {i} is not a probability vector (sum {s})"
                )));
            }
            if lengths[i] == 0 {
                return Err(NetError::ZeroLengthDocument(i));
            }
        }
        Ok(Corpus { d, lengths, vocab })
    }

    /// Word-frequency matrix, `p x n`, columns summing to one.
    pub fn frequencies(&self) -> ArrayView2<'_, f64> {
        self.d.view()
    }

    pub fn lengths(&self) -> &[u64] {
        &self.lengths
    }

    pub fn vocab(&self) -> Option<&[String]> {
        self.vocab.as_deref()
    }

    pub fn word_count(&self) -> usize {
        self.d.nrows()
    }

    pub fn doc_count(&self) -> usize {
        self.d.ncols()
    }
}

/// Topic-model parameters: `a` is `p x k` (one topic distribution over words
/// per column), `w` is `k x n` (one topic-weight vector per document column).
/// All columns are probability vectors.
#[derive(Debug, Clone)]
pub struct PlsiParams {
    pub a: Array2<f64>,
    pub w: Array2<f64>,
}

impl PlsiParams {
    pub fn new(a: Array2<f64>, w: Array2<f64>) -> Result<Self, NetError> {
        if a.ncols() != w.nrows() {
            return Err(NetError::Dimensions(format!(
                "a has {} topics but w has {}",
                a.ncols(),
                w.nrows()
            )));
        }
        if a.nrows() == 0 || a.ncols() == 0 || w.ncols() == 0 {
            return Err(NetError::Dimensions("empty topic model".into()));
        }
        for (name, m) in [("topic", &a), ("weight", &w)] {
            for (c, col) in m.columns().into_iter().enumerate() {
                let s: f64 = col.sum();
                if (s - 1.0).abs() > COL_TOL || col.iter().any(|&x| x < 0.0) {
                    return Err(NetError::InvalidParams(format!(
                        "{name} column {c} is not a probability vector (sum {s})"
                    )));
                }
            }
        }
        Ok(PlsiParams { a, w })
    }

    pub fn word_count(&self) -> usize {
        self.a.nrows()
    }

    pub fn topic_count(&self) -> usize {
        self.a.ncols()
    }

    pub fn doc_count(&self) -> usize {
        self.w.ncols()
    }

    /// Expected word-frequency matrix `A W` (`p x n`).
    pub fn expected_frequencies(&self) -> Array2<f64> {
        self.a.dot(&self.w)
    }
}

/// Sample a corpus: document `i` draws `lengths[i]` words from the mixture
/// `A w_i` via a multinomial, deterministically in `seed`.
///
/// Counts are drawn by the conditional-binomial decomposition in word order,
/// which is equivalent to a multinomial draw and O(p) per document.
pub fn sample_plsi(params: &PlsiParams, lengths: &[u64], seed: u64) -> Result<Corpus, NetError> {
    let (p, n) = (params.word_count(), params.doc_count());
    if lengths.len() != n {
        return Err(NetError::Dimensions(format!(
            "{} lengths for {n} documents",
            lengths.len()
        )));
    }
    let probs = params.expected_frequencies();
    let mut rng = rng_from_seed(seed);
    let mut counts = Array2::<u64>::zeros((p, n));
    for i in 0..n {
        if lengths[i] == 0 {
            return Err(NetError::ZeroLengthDocument(i));
        }
        let mut remaining = lengths[i];
        let mut mass_left = 1.0f64;
        for j in 0..p {
            if remaining == 0 {
                break;
            }
            if j + 1 == p {
                counts[[j, i]] = remaining;
                remaining = 0;
                break;
            }
            let pj = probs[[j, i]];
            if pj <= 0.0 {
                mass_left -= pj.max(0.0);
                continue;
            }
            let cond = (pj / mass_left).clamp(0.0, 1.0);
            let draw = if cond >= 1.0 {
                remaining
            } else {
                Binomial::new(remaining, cond)
                    .expect("conditional probability is in [0,1]")
                    .sample(&mut rng)
            };
            counts[[j, i]] = draw;
            remaining -= draw;
            mass_left -= pj;
            if mass_left <= 0.0 && remaining > 0 {
                // numerical crumbs: dump the rest on this word
                counts[[j, i]] += remaining;
                remaining = 0;
            }
        }
        if remaining > 0 {
            let j = p - 1;
            counts[[j, i]] += remaining;
        }
    }
    Corpus::from_counts(counts.view(), None)
}

/// Load a corpus from a sparse triplet file plus a vocabulary file.
///
/// Triplet lines are `doc word count` (0-indexed integers, whitespace
/// separated, `#` comments allowed); duplicate (doc, word) pairs accumulate.
/// The vocabulary file has one token per line and fixes the word count;
/// the document count is one plus the largest document index.
pub fn load_corpus<P: AsRef<Path>>(triplets: P, vocab: P) -> Result<Corpus, NetError> {
    let vocab_path = vocab.as_ref();
    let vfile = std::fs::File::open(vocab_path).map_err(|source| NetError::Io {
        path: vocab_path.display().to_string(),
        source,
    })?;
    let mut tokens = Vec::new();
    for (idx, line) in std::io::BufReader::new(vfile).lines().enumerate() {
        let line = line.map_err(|source| NetError::Io {
            path: vocab_path.display().to_string(),
            source,
        })?;
        let tok = line.trim();
        if tok.is_empty() {
            return Err(NetError::Parse {
                line: idx + 1,
                msg: "empty vocabulary token".into(),
            });
        }
        tokens.push(tok.to_string());
    }
    if tokens.is_empty() {
        return Err(NetError::InvalidParams("vocabulary file is empty".into()));
    }
    let p = tokens.len();

    let tri_path = triplets.as_ref();
    let tfile = std::fs::File::open(tri_path).map_err(|source| NetError::Io {
        path: tri_path.display().to_string(),
        source,
    })?;
    let mut entries: Vec<(usize, usize, u64)> = Vec::new();
    let mut max_doc = None::<usize>;
    for (idx, line) in std::io::BufReader::new(tfile).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| NetError::Io {
            path: tri_path.display().to_string(),
            source,
        })?;
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(NetError::Parse {
                line: line_no,
                msg: format!("expected `doc word count`, got {:?}", content.trim()),
            });
        }
        let parse = |tok: &str| -> Result<u64, NetError> {
            tok.parse::<u64>().map_err(|_| NetError::Parse {
                line: line_no,
                msg: format!("invalid integer {tok:?}"),
            })
        };
        let doc = parse(fields[0])? as usize;
        let word = parse(fields[1])? as usize;
        let count = parse(fields[2])?;
        if word >= p {
            return Err(NetError::Parse {
                line: line_no,
                msg: format!("word index {word} out of range for vocabulary of {p}"),
            });
        }
        max_doc = Some(max_doc.map_or(doc, |m| m.max(doc)));
        entries.push((doc, word, count));
    }
    let Some(max_doc) = max_doc else {
        return Err(NetError::InvalidParams("triplet file has no entries".into()));
    };
    let n = max_doc + 1;
    let mut counts = Array2::<u64>::zeros((p, n));
    for (doc, word, count) in entries {
        counts[[word, doc]] += count;
    }
    Corpus::from_counts(counts.view(), Some(tokens))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;
    use std::io::Write;

    fn small_params() -> PlsiParams {
        PlsiParams::new(
            arr2(&[[0.5, 0.0], [0.3, 0.2], [0.2, 0.8]]),
            arr2(&[[1.0, 0.25, 0.5], [0.0, 0.75, 0.5]]),
        )
        .unwrap()
    }

    #[test]
    fn sampled_columns_are_integer_counts_summing_to_length() {
        let params = small_params();
        let lengths = [40u64, 100, 7];
        let corpus = sample_plsi(&params, &lengths, 5).unwrap();
        assert_eq!(corpus.lengths(), &lengths);
        for i in 0..3 {
            let mut total = 0.0;
            for j in 0..3 {
                let scaled = corpus.frequencies()[[j, i]] * lengths[i] as f64;
                assert!(
                    (scaled - scaled.round()).abs() < 1e-9,
                    "entry ({j},{i}) not integral: {scaled}"
                );
                total += scaled;
            }
            assert!((total - lengths[i] as f64).abs() < 1e-9);
        }
        // determinism
        let again = sample_plsi(&params, &lengths, 5).unwrap();
        assert_eq!(corpus.frequencies(), again.frequencies());
    }

    #[test]
    fn long_documents_approach_expected_frequencies() {
        // Law of large numbers: with 1e5 words per document the empirical
        // column is close to A w_i in l1 norm, across seeds.
        let params = small_params();
        let expected = params.expected_frequencies();
        let lengths = [100_000u64; 3];
        for seed in 0..20 {
            let corpus = sample_plsi(&params, &lengths, seed).unwrap();
            for i in 0..3 {
                let gap: f64 = (0..3)
                    .map(|j| (corpus.frequencies()[[j, i]] - expected[[j, i]]).abs())
                    .sum();
                assert!(gap < 0.02, "seed {seed} doc {i}: l1 gap {gap}");
            }
        }
    }

    #[test]
    fn corpus_columns_sum_to_one() {
        let counts = ndarray::arr2(&[[3u64, 0], [1, 2], [0, 5]]);
        let corpus = Corpus::from_counts(counts.view(), None).unwrap();
        for i in 0..2 {
            let s: f64 = corpus.frequencies().column(i).sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
        let zero = ndarray::arr2(&[[0u64], [0]]);
        assert!(matches!(
            Corpus::from_counts(zero.view(), None),
            Err(NetError::ZeroLengthDocument(0))
        ));
    }

    #[test]
    fn triplet_loader_round_trips() {
        let mut tf = tempfile::NamedTempFile::new().unwrap();
        write!(tf, "# doc word count\n0 0 3\n0 1 1\n1 2 5\n1 1 2\n1 1 1\n").unwrap();
        let mut vf = tempfile::NamedTempFile::new().unwrap();
        write!(vf, "alpha\nbeta\ngamma\n").unwrap();
        let corpus = load_corpus(tf.path(), vf.path()).unwrap();
        assert_eq!(corpus.word_count(), 3);
        assert_eq!(corpus.doc_count(), 2);
        assert_eq!(corpus.lengths(), &[4, 8]);
        // duplicates accumulated: word beta in doc 1 has count 3
        assert!((corpus.frequencies()[[1, 1]] - 3.0 / 8.0).abs() < 1e-12);
        assert_eq!(corpus.vocab().unwrap()[2], "gamma");

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        write!(bad, "0 0 3\n0 9 1\n").unwrap();
        let err = load_corpus(bad.path(), vf.path()).unwrap_err();
        assert!(matches!(err, NetError::Parse { line: 2, .. }));
    }
}
