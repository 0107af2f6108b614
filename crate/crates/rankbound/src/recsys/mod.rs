//! Desk-scale implicit-feedback recommender built on the crate's losses,
//! samplers and metrics.
//!
//! This is deliberately not a sequence-model zoo. The ranking theory the rest
//! of the crate verifies is architecture-agnostic, so two minimal scorers are
//! enough to exercise it end to end: a plain matrix-factorization scorer
//! (user embedding · item embedding) and a history-mean scorer (mean of the
//! user's past item embeddings · item embedding) standing in for a learned
//! sequence encoder. Both have exact analytic gradients, which the training
//! loop chains through the loss gradients, and which the tests can compare
//! against finite differences.
//!
//! The pipeline: [`load_interactions`] ingests a log, [`split_leave_last`]
//! holds out each user's last two events, [`train`] fits embeddings with
//! sampled losses, and full-catalog [`evaluate`] reports mean NDCG@k / MRR@k.
//! Evaluation never samples negatives; the candidate set is every item the
//! user has not interacted with.

mod data;
mod model;
mod train;

pub use data::{
    load_interactions, split_leave_last, synthetic_blocks, InputFormat, InteractionDataset,
    SplitDataset,
};
pub use model::{representation, score, write_model_dump, ModelParams, ScorerKind};
pub use train::{
    accumulate_example, evaluate, train, write_trace_csv, EvalSplit, OptimizerKind, TraceRow,
    TrainConfig, TrainOutcome,
};
