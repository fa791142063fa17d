//! Semantic contribution analysis for citation corpora.
//!
//! The pipeline measures a paper's *contribution* — the mean pairwise
//! semantic distance between the papers it cites and the papers citing it —
//! and compares that measure against citation and reader counts the way a
//! bibliometric study would: correlations, distributions, and bucketed
//! mean/spread profiles.
//!
//! Stages, each its own module and CLI step:
//!
//! 1. [`corpus`] — parse and validate paper metadata (JSON lines) and
//!    citation edges (CSV) into a deduplicated, accounting-complete corpus;
//! 2. [`textmodel`] — tokenize title+abstract text, build a tf-idf
//!    vocabulary, and produce L2-normalized document vectors;
//! 3. [`graph`] — index citation edges for O(log n) neighborhood lookup;
//! 4. [`contribution`] — score every paper and assemble the per-paper
//!    metric table;
//! 5. [`analytics`] — correlations, histograms, and equal-size-bucket
//!    studies over the table;
//! 6. [`synth`] — deterministic synthetic corpora with planted statistical
//!    structure, for end-to-end testing;
//! 7. [`cli`] — file-staged command orchestration.
//!
//! Numeric work is generic over the scalar type through [`numeric::Real`]
//! (implemented for `f64` and `f32`); [`Real64`] is the default used by the
//! binary. Everything downstream of ingest is deterministic: ordered maps on
//! all serialization paths, fixed-algorithm transcendentals, and a seeded,
//! fully specified random stream in [`synth`].

pub mod analytics;
pub mod cli;
pub mod contribution;
pub mod corpus;
pub mod graph;
pub mod numeric;
pub mod synth;
pub mod textmodel;

pub use analytics::{analyze, AnalysisReport, AnalyzeOptions};
pub use contribution::{contribution, contribution_all, ContributionScore, MetricTable};
pub use corpus::{CitationEdge, Corpus, Doi, PaperRecord};
pub use graph::{build_graph, CitationGraph};
pub use numeric::{Real, Real64};
pub use synth::{generate, SynthConfig, SynthOutput};
pub use textmodel::{build_vectors, cosine, distance, tokenize, DocumentVector, VectorSet};

/// Document vector over the default scalar.
pub type DocumentVector64 = textmodel::DocumentVector<Real64>;
/// Vector set over the default scalar.
pub type VectorSet64 = textmodel::VectorSet<Real64>;
/// Metric table over the default scalar.
pub type MetricTable64 = contribution::MetricTable<Real64>;
/// Analysis report over the default scalar.
pub type AnalysisReport64 = analytics::AnalysisReport<Real64>;
