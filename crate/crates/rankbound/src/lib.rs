//! Ranking losses for implicit-feedback recommendation, the metrics they bound,
//! and exact hypergeometric machinery connecting sampled losses to full-catalog
//! ranking quality.
//!
//! The crate is organised around one pipeline:
//!
//! * [`score`] holds per-user score configurations (one positive, many negatives)
//!   and derives ranks and exceedance counts from them.
//! * [`metrics`] turns ranks into NDCG / MRR values.
//! * [`losses`] evaluates BCE, BPR and CCE losses and their analytic gradients,
//!   on full catalogs or sampled negative sets.
//! * [`sampling`] draws uniform without-replacement negative samples with a
//!   reproducible stream discipline.
//! * [`hypergeom`] provides exact (big-rational) and floating-point
//!   hypergeometric tail machinery and the metric/loss bound probabilities
//!   built on it.
//! * [`bounds`] wires the above into deterministic and Monte Carlo
//!   verification harnesses plus bound surfaces over (K, rank) grids.
//! * [`recsys`] is a small trainer that fits embedding scorers with the same
//!   losses and samplers, so the theory can be exercised end to end.

pub mod bounds;
mod error;
pub mod hypergeom;
pub mod losses;
pub mod metrics;
pub mod recsys;
pub mod sampling;
pub mod score;

pub use error::{Error, Result};
pub use hypergeom::{BoundProbability, BoundProbabilityQuery, HypergeomParams, WorstCaseOrdering};
pub use losses::{LossGradient, LossKind, ScoreBound};
pub use metrics::MetricKind;
pub use sampling::SamplerConfig;
pub use score::{GammaCounts, Rank, ScoreSet};
