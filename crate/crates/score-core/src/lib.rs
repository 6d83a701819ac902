//! Spectral methods built on entrywise eigenvector ratios.
//!
//! The crate covers four related tasks on undirected (and some directed)
//! networks and on bag-of-words corpora:
//!
//! * community detection under degree heterogeneity ([`community`]),
//! * mixed-membership estimation via simplex vertex hunting ([`mixedmem`],
//!   [`vertexhunt`]),
//! * global and stepwise hypothesis tests on the community count
//!   ([`inference`]),
//! * topic-matrix estimation and topic ranking for text corpora ([`topics`]).
//!
//! The common engine is in [`spectra`]: take leading eigenvectors (or singular
//! vectors), divide each by the first one entrywise, and work with the
//! resulting ratio rows, which cancels per-node degree (or frequency) scaling.
//! Graph containers, random models, and samplers live in [`netcore`].
//!
//! All randomized routines take an explicit `u64` seed and are deterministic
//! given it; see [`rng`] for the generator and the seed-derivation rule. With
//! the default `parallel` feature, data-parallel loops run on rayon but are
//! constructed to return bit-identical results to the sequential fallback.

pub mod community;
pub mod inference;
pub mod mixedmem;
pub mod netcore;
pub mod par;
pub mod rng;
pub mod spectra;
pub mod topics;
pub mod vertexhunt;
