//! Ranking metrics over a single held-out positive.
//!
//! With one relevant item at rank r₊, NDCG reduces to 1/log₂(1+r₊) and MRR
//! to 1/r₊. The "@k" variants return exactly 0 beyond the cutoff. Natural
//! logs appear only in the loss/bound algebra; the base-2 log lives here.

use crate::error::{Error, Result};
use crate::score::Rank;

/// A metric value in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MetricValue(f64);

impl MetricValue {
    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Ndcg,
    Mrr,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Ndcg => "ndcg",
            MetricKind::Mrr => "mrr",
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// NDCG of a single relevant item: 1 / log₂(1 + r₊).
pub fn ndcg(rank: Rank) -> MetricValue {
    MetricValue(1.0 / (1.0 + rank.get() as f64).log2())
}

/// Reciprocal rank: 1 / r₊.
pub fn mrr(rank: Rank) -> MetricValue {
    MetricValue(1.0 / rank.get() as f64)
}

pub fn metric(kind: MetricKind, rank: Rank) -> MetricValue {
    match kind {
        MetricKind::Ndcg => ndcg(rank),
        MetricKind::Mrr => mrr(rank),
    }
}

/// The metric when r₊ ≤ k, else exactly 0.
pub fn metric_at_k(rank: Rank, k: usize, kind: MetricKind) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroCutoff);
    }
    Ok(if rank.get() <= k { metric(kind, rank).get() } else { 0.0 })
}

/// −log metric(r₊): ln(log₂(1 + r₊)) for NDCG, ln(r₊) for MRR.
///
/// Computed directly from the rank so the bound checks avoid the
/// round-trip through 1/metric.
pub fn neg_log_metric(kind: MetricKind, rank: Rank) -> f64 {
    match kind {
        MetricKind::Ndcg => (1.0 + rank.get() as f64).log2().ln(),
        MetricKind::Mrr => (rank.get() as f64).ln(),
    }
}
