//! Per-user score configurations and the rank / exceedance counts derived
//! from them.
//!
//! A [`ScoreSet`] holds one positive score s₊ and the scores of negative
//! items, either the full catalog or a sampled K-subset. Ranks and Γ-set
//! cardinalities both use the ≥ comparison, so ties count against the
//! positive. Some formulations write a strict inequality for the
//! zero-threshold set; this crate uses ≥ for both conditions consistently.

use crate::error::{Error, Result};

/// One positive score plus the negative scores it competes against.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    positive: f64,
    negatives: Vec<f64>,
    sampled: bool,
}

impl ScoreSet {
    /// Full-catalog configuration: `negatives` covers every negative item.
    pub fn full(positive: f64, negatives: Vec<f64>) -> Result<Self> {
        Self::validated(positive, negatives, false)
    }

    /// Sampled configuration: `negatives` is a K-subset of the catalog.
    pub fn sampled(positive: f64, negatives: Vec<f64>) -> Result<Self> {
        Self::validated(positive, negatives, true)
    }

    fn validated(positive: f64, negatives: Vec<f64>, sampled: bool) -> Result<Self> {
        if negatives.is_empty() {
            return Err(Error::EmptyNegatives);
        }
        if !positive.is_finite() {
            return Err(Error::NonFiniteScore(positive));
        }
        if let Some(&bad) = negatives.iter().find(|s| !s.is_finite()) {
            return Err(Error::NonFiniteScore(bad));
        }
        Ok(Self { positive, negatives, sampled })
    }

    pub fn positive(&self) -> f64 {
        self.positive
    }

    pub fn negatives(&self) -> &[f64] {
        &self.negatives
    }

    pub fn is_sampled(&self) -> bool {
        self.sampled
    }

    /// Number of negative scores (K for sampled sets, |I⁻| for full ones).
    pub fn len(&self) -> usize {
        self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructors reject empty negative lists
    }
}

/// A 1-based rank; rank 1 means the positive beat every negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(usize);

impl Rank {
    pub fn new(value: usize) -> Result<Self> {
        if value == 0 {
            return Err(Error::ZeroRank);
        }
        Ok(Rank(value))
    }

    pub fn get(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for Rank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Cardinalities of the exceedance sets for one score configuration.
///
/// `gamma_k` counts negatives with s_i ≥ s₊ and `gamma0_k` those with
/// s_i ≥ 0, within the set itself. The population fields repeat those
/// counts only for full-catalog sets; a sampled subset cannot know them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaCounts {
    pub gamma_k: usize,
    pub gamma0_k: usize,
    pub population_gamma: Option<usize>,
    pub population_gamma0: Option<usize>,
}

/// Rank of the positive: 1 + |{i : s_i ≥ s₊}|. Ties count against it.
pub fn compute_rank(scores: &ScoreSet) -> Rank {
    let above = scores.negatives.iter().filter(|&&s| s >= scores.positive).count();
    Rank(1 + above)
}

/// Counts of negatives at or above s₊ and at or above zero.
pub fn compute_gamma_counts(scores: &ScoreSet) -> GammaCounts {
    let gamma_k = scores.negatives.iter().filter(|&&s| s >= scores.positive).count();
    let gamma0_k = scores.negatives.iter().filter(|&&s| s >= 0.0).count();
    let (population_gamma, population_gamma0) = if scores.sampled {
        (None, None)
    } else {
        (Some(gamma_k), Some(gamma0_k))
    };
    GammaCounts { gamma_k, gamma0_k, population_gamma, population_gamma0 }
}
