//! Two-stage flow-graph prediction for procedural texts.
//!
//! Node prediction tags entity spans with a linear-chain CRF over a
//! bidirectional recurrent encoder; edge prediction scores node pairs with
//! a biaffine scorer and decodes a maximum spanning arborescence with
//! Chu-Liu-Edmonds. Training supports target-only, source-only and
//! two-phase domain adaptation regimes.

pub mod augment;
pub mod corpus;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod numeric;
pub mod parser;
pub mod pipeline;
pub mod report;
pub mod synthetic;
pub mod tagger;
pub mod train;

pub use error::{Error, Result};
pub use graph::{
    ancestors, decode_iob, encode_iob, validate_flow_graph, Document, Edge, EdgeLabel, FlowGraph,
    IobLabel, NodeSpan, Tag, TagSequence, Token, ValidationReport, Violation,
};
pub use metrics::{agreement, edge_f1, node_f1, pipeline_f1, Counts, EvalTuple, Prf};
pub use parser::{cle_decode, BiaffineConfig, EdgeModelConfig, EdgeParser, Head, LossWeights, ScoreTensor};
pub use tagger::{CrfModel, NodeModelConfig, NodeTagger};
pub use train::{
    lr_at, run_cross_validation, train, AdamW, ModelKind, OptimizerConfig, PhaseConfig, Regime,
    TrainPlan, TrainedModel,
};
