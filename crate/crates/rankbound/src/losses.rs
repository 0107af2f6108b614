//! BCE, BPR and CCE per-user losses with analytic gradients.
//!
//! All three are written in softplus form over score differences or raw
//! scores:
//!
//! * BCE  = softplus(−s₊) + Σᵢ softplus(sᵢ)
//! * BPR  = Σᵢ softplus(sᵢ − s₊)
//! * CCE  = ln(1 + Σᵢ exp(sᵢ − s₊))
//!
//! softplus(x) is computed as max(x, 0) + log1p(exp(−|x|)) and CCE goes
//! through a log-sum-exp shift, so values and gradients stay finite for
//! |scores| well past 700. With a single negative, BPR and CCE are the same
//! function; both are routed through one softplus(s − s₊) code path so the
//! equality is bitwise rather than approximate.

use crate::error::{Error, Result};
use crate::score::ScoreSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Bce,
    Bpr,
    Cce,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Bce, LossKind::Bpr, LossKind::Cce];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Bce => "bce",
            LossKind::Bpr => "bpr",
            LossKind::Cce => "cce",
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Partial derivatives of a loss with respect to every score.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    /// ∂ℓ/∂s₊; strictly negative for all three losses.
    pub d_positive: f64,
    /// ∂ℓ/∂sᵢ aligned with the score set's negatives; strictly positive.
    pub d_negatives: Vec<f64>,
}

/// Symmetric score box [−S, S]; every loss is minimized at s₊ = S, sᵢ = −S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreBound(f64);

impl ScoreBound {
    pub fn new(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::NonFiniteScore(s));
        }
        Ok(ScoreBound(s))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// The box-constrained minimizer (s₊ = S, all negatives at −S).
    pub fn corner(self, negatives: usize) -> Result<ScoreSet> {
        ScoreSet::sampled(self.0, vec![-self.0; negatives])
    }
}

/// Numerically stable softplus: ln(1 + eˣ).
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Numerically stable logistic function σ(x) = 1 / (1 + e⁻ˣ).
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-user loss value; non-negative and finite for finite scores.
pub fn loss_value(kind: LossKind, scores: &ScoreSet) -> f64 {
    let pos = scores.positive();
    let negs = scores.negatives();
    match kind {
        LossKind::Bce => softplus(-pos) + negs.iter().map(|&s| softplus(s)).sum::<f64>(),
        LossKind::Bpr => negs.iter().map(|&s| softplus(s - pos)).sum::<f64>(),
        LossKind::Cce => {
            if negs.len() == 1 {
                // shared pairwise path: identical arithmetic to BPR at K = 1
                return softplus(negs[0] - pos);
            }
            let shift = negs.iter().fold(0.0f64, |m, &s| m.max(s - pos));
            let tail: f64 = negs.iter().map(|&s| (s - pos - shift).exp()).sum();
            shift + ((-shift).exp() + tail).ln()
        }
    }
}

/// Analytic gradient of the loss with respect to s₊ and every sᵢ.
pub fn loss_gradient(kind: LossKind, scores: &ScoreSet) -> LossGradient {
    let pos = scores.positive();
    let negs = scores.negatives();
    match kind {
        LossKind::Bce => LossGradient {
            d_positive: -sigmoid(-pos),
            d_negatives: negs.iter().map(|&s| sigmoid(s)).collect(),
        },
        LossKind::Bpr => {
            let d_negatives: Vec<f64> = negs.iter().map(|&s| sigmoid(s - pos)).collect();
            LossGradient { d_positive: -d_negatives.iter().sum::<f64>(), d_negatives }
        }
        LossKind::Cce => {
            if negs.len() == 1 {
                // same path as BPR at K = 1, see loss_value
                let g = sigmoid(negs[0] - pos);
                return LossGradient { d_positive: -g, d_negatives: vec![g] };
            }
            // With Z = 1 + Σ exp(dᵢ): ∂ℓ/∂s₊ = −(Z−1)/Z, ∂ℓ/∂sᵢ = exp(dᵢ)/Z,
            // evaluated under the same shift as the loss.
            let shift = negs.iter().fold(0.0f64, |m, &s| m.max(s - pos));
            let terms: Vec<f64> = negs.iter().map(|&s| (s - pos - shift).exp()).collect();
            let denom = (-shift).exp() + terms.iter().sum::<f64>();
            LossGradient {
                d_positive: -(terms.iter().sum::<f64>() / denom),
                d_negatives: terms.into_iter().map(|t| t / denom).collect(),
            }
        }
    }
}

/// True iff BPR and CCE coincide exactly on a single-negative score set.
pub fn check_k1_equivalence(scores: &ScoreSet) -> Result<bool> {
    if scores.len() != 1 {
        return Err(Error::NotSingleNegative(scores.len()));
    }
    let bpr = loss_value(LossKind::Bpr, scores);
    let cce = loss_value(LossKind::Cce, scores);
    Ok(bpr == cce && bpr.to_bits() == cce.to_bits())
}
