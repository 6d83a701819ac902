//! Graph and corpus containers, file loading, and model samplers.
//!
//! [`Graph`] stores a simple graph (no self-loops, deduplicated edges) as an
//! edge set plus adjacency lists, with a dense matrix view built on demand.
//! [`DcmmParams`] holds degree-corrected mixed-membership model parameters
//! `(Θ, Π, P)` whose expected adjacency is `Θ Π P Πᵀ Θ`; [`PlsiParams`] holds
//! a topic model `(A, W)` whose word-frequency expectation is `A W`. Samplers
//! draw Bernoulli networks and multinomial corpora from them, seeded
//! explicitly and reproducibly.

mod corpus;
mod graph;
mod params;
pub mod synthetic;

pub use corpus::{load_corpus, sample_plsi, Corpus, PlsiParams};
pub use graph::{giant_component, load_edge_list, EdgeListOptions, Graph};
pub use params::{expected_adjacency, sample_dcmm, sample_symmetric_bernoulli, DcmmParams};

use thiserror::Error;

/// Errors from graph/corpus construction, parsing, and sampling.
#[derive(Debug, Error)]
pub enum NetError {
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("could not read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parameter dimensions are inconsistent: {0}")]
    Dimensions(String),
    #[error("{0}")]
    InvalidParams(String),
    #[error("model is not identifiable: {0}")]
    NotIdentifiable(String),
    #[error("expected adjacency entry ({i},{j}) = {value} is outside [0,1]; refusing to sample")]
    ProbabilityOutOfRange { i: usize, j: usize, value: f64 },
    #[error("document {0} has zero length")]
    ZeroLengthDocument(usize),
}
