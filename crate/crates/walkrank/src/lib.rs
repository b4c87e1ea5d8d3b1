//! Random-walk ranking, centrality, similarity, and bipartite recommendation
//! algorithms on sparse graphs, with a deterministic, seedable API.

pub mod absorbing;
pub mod centrality;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod recommender;
pub mod similarity;
pub mod spectral;

pub use absorbing::{AbsorbingPartition, AbsorptionResult, DagInfluence};
pub use centrality::{SecondOrderParams, SecondOrderStats};
pub use error::{Error, Result};
pub use graph::{
    load_bipartite, load_directed_graph, BipartiteGraph, DirectedGraph, GraphBuilder, NodeId,
    ParseOptions,
};
pub use matrix::{DanglingPolicy, HeatOperator, Normalization, ScoreVector, TransitionMatrix};
pub use recommender::{
    EvaluationConfig, EvaluationReport, HybridParams, RecommendationList, ScoreMethod,
};
pub use similarity::{ProfileAxis, SimilarityKind, SimilarityMatrix};
pub use spectral::{HitsResult, PageRankParams};
