//! Link recommendation on weighted bipartite graphs.
//!
//! A candidate `(bottom, top)` pair is first screened for sufficient
//! common-neighbor support, then given a predicted weight equal to the
//! similarity-weighted mean of ratings from the top's existing bottoms.
//! [`eval`] reproduces the held-out-edge evaluation protocol around it.
//!
//! All numeric code is generic over [`Scalar`]; the aliases below pin the
//! common choices.

pub mod eval;
pub mod graph;
pub mod ingest;
pub mod recommender;
pub mod scalar;

pub use eval::{evaluate, histogram, percent_error, EvalOptions, EvalRecord, EvalSummary, Outcome};
pub use graph::{BipartiteGraph, DegreeStats, GraphError, NodeId, RatingEdge, RatingRange, Side};
pub use ingest::{parse_dataset, split_edges, DatasetFormat, SplitConfig, SplitResult};
pub use recommender::{
    temp_similarity, threshold, GuardMode, Prediction, RecommendError, Recommender, RecommenderConfig,
    SimilarityScore, SufficiencyReport,
};
pub use scalar::Scalar;

/// Exact rational scalar used by the test oracles.
pub type Exact = num_rational::BigRational;

pub type Graph = BipartiteGraph<f64>;
pub type Graph32 = BipartiteGraph<f32>;
pub type ExactGraph = BipartiteGraph<Exact>;

pub type Edge = RatingEdge<f64>;
pub type ExactEdge = RatingEdge<Exact>;

pub type Report = SufficiencyReport<f64>;
pub type ExactReport = SufficiencyReport<Exact>;

pub type RatingPrediction = Prediction<f64>;
pub type ExactPrediction = Prediction<Exact>;

pub type Record = EvalRecord<f64>;
