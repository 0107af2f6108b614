//! Training loop, optimizers, and full-catalog evaluation.
//!
//! One training run is strictly sequential and consumes randomness in a fixed
//! order (stream 0 of the seed initializes embeddings, stream 1 drives
//! shuffling and negative sampling), so identical configs produce bitwise
//! identical traces. Gradients are accumulated per mini-batch in sorted maps
//! and applied in row order, which keeps even the float summation order
//! reproducible.

use std::collections::BTreeMap;
use std::io::Write;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::losses::{loss_gradient, loss_value, LossKind};
use crate::metrics::{metric_at_k, MetricKind};
use crate::sampling::{sample_indices_excluding, stream_rng};
use crate::score::{Rank, ScoreSet};

use super::data::SplitDataset;
use super::model::{dot, representation, ModelParams, ScorerKind};

/// Gradient-descent flavor; Adam is the default throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// Everything one training run depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub loss: LossKind,
    /// K, negatives sampled per positive.
    pub negatives: usize,
    pub scorer: ScorerKind,
    pub dim: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Evaluation cutoff k for NDCG@k / MRR@k.
    pub cutoff: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            loss: LossKind::Bpr,
            negatives: 5,
            scorer: ScorerKind::Factor,
            dim: 64,
            batch_size: 128,
            learning_rate: 0.001,
            epochs: 100,
            optimizer: OptimizerKind::default(),
            seed: 0,
            cutoff: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::ZeroDim);
        }
        if self.batch_size == 0 {
            return Err(Error::ZeroBatchSize);
        }
        if self.negatives == 0 {
            return Err(Error::ZeroSampleSize);
        }
        if self.cutoff == 0 {
            return Err(Error::ZeroCutoff);
        }
        // zero is deliberately allowed: a no-op run is a useful baseline
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidHyperparameter("learning_rate must be finite and >= 0"));
        }
        if let OptimizerKind::Adam { beta1, beta2, eps } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
                return Err(Error::InvalidHyperparameter("adam betas must lie in [0, 1)"));
            }
            if !eps.is_finite() || eps <= 0.0 {
                return Err(Error::InvalidHyperparameter("adam eps must be positive"));
            }
        }
        Ok(())
    }
}

/// Which held-out item an evaluation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSplit {
    Validation,
    Test,
}

impl EvalSplit {
    pub fn name(self) -> &'static str {
        match self {
            EvalSplit::Validation => "validation",
            EvalSplit::Test => "test",
        }
    }
}

impl std::fmt::Display for EvalSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One metric observation in the per-epoch trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub split: EvalSplit,
    pub metric: MetricKind,
    pub cutoff: usize,
    pub value: f64,
}

/// Writes trace rows as `epoch,split,metric,cutoff,value`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "epoch,split,metric,cutoff,value")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.epoch, r.split, r.metric, r.cutoff, r.value)?;
    }
    Ok(())
}

/// Result of a training run: best-validation parameters and the full trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub trace: Vec<TraceRow>,
    pub best_epoch: usize,
    pub best_validation_ndcg: f64,
}

/// Computes one example's sampled loss and adds its parameter gradients
/// (chained through the scorer) into the per-row accumulators.
///
/// For score s = r · h_i with representation r, the chain rule gives
/// ∂ℓ/∂h_i = (∂ℓ/∂s) r for each scored item, plus ∂ℓ/∂(rep source):
/// (∂ℓ/∂s) h_i into the user row for the factor scorer, or split evenly
/// over the history rows for the history-mean scorer.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_example(
    params: &ModelParams,
    scorer: ScorerKind,
    user: usize,
    history: &[usize],
    positive: usize,
    negatives: &[usize],
    loss: LossKind,
    user_grads: &mut BTreeMap<usize, Vec<f64>>,
    item_grads: &mut BTreeMap<usize, Vec<f64>>,
) -> Result<f64> {
    let d = params.d();
    let rep = representation(params, scorer, user, history)?;
    let s_pos = dot(&rep, params.item_vec(positive));
    let neg_scores: Vec<f64> =
        negatives.iter().map(|&i| dot(&rep, params.item_vec(i))).collect();
    let scores = ScoreSet::sampled(s_pos, neg_scores)?;
    let value = loss_value(loss, &scores);
    let grad = loss_gradient(loss, &scores);

    fn add_scaled(map: &mut BTreeMap<usize, Vec<f64>>, row: usize, d: usize, s: f64, v: &[f64]) {
        let acc = map.entry(row).or_insert_with(|| vec![0.0; d]);
        for (a, b) in acc.iter_mut().zip(v) {
            *a += s * b;
        }
    }
    let mut backprop_to_rep = |ds: f64, item: usize| match scorer {
        ScorerKind::Factor => add_scaled(user_grads, user, d, ds, params.item_vec(item)),
        ScorerKind::HistoryMean => {
            let w = ds / history.len() as f64;
            for &j in history {
                add_scaled(item_grads, j, d, w, params.item_vec(item));
            }
        }
    };
    backprop_to_rep(grad.d_positive, positive);
    for (&item, &ds) in negatives.iter().zip(&grad.d_negatives) {
        backprop_to_rep(ds, item);
    }
    add_scaled(item_grads, positive, d, grad.d_positive, &rep);
    for (&item, &ds) in negatives.iter().zip(&grad.d_negatives) {
        add_scaled(item_grads, item, d, ds, &rep);
    }
    Ok(value)
}

enum Side {
    User,
    Item,
}

struct OptimizerState {
    kind: OptimizerKind,
    lr: f64,
    t: i32,
    m1_user: Vec<f64>,
    m2_user: Vec<f64>,
    m1_item: Vec<f64>,
    m2_item: Vec<f64>,
}

impl OptimizerState {
    fn new(kind: OptimizerKind, lr: f64, user_len: usize, item_len: usize) -> Self {
        let (m1_user, m2_user, m1_item, m2_item) = match kind {
            OptimizerKind::Sgd => (Vec::new(), Vec::new(), Vec::new(), Vec::new()),
            OptimizerKind::Adam { .. } => {
                (vec![0.0; user_len], vec![0.0; user_len], vec![0.0; item_len], vec![0.0; item_len])
            }
        };
        OptimizerState { kind, lr, t: 0, m1_user, m2_user, m1_item, m2_item }
    }

    fn begin_step(&mut self) {
        self.t += 1;
    }

    /// Lazy Adam: moments update only on rows a batch touched, with the
    /// global step's bias correction.
    fn apply_row(&mut self, side: Side, row: usize, d: usize, grad: &[f64], out: &mut [f64]) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (o, g) in out.iter_mut().zip(grad) {
                    *o -= self.lr * g;
                }
            }
            OptimizerKind::Adam { beta1, beta2, eps } => {
                let (m1, m2) = match side {
                    Side::User => (&mut self.m1_user, &mut self.m2_user),
                    Side::Item => (&mut self.m1_item, &mut self.m2_item),
                };
                let base = row * d;
                let bc1 = 1.0 - beta1.powi(self.t);
                let bc2 = 1.0 - beta2.powi(self.t);
                for j in 0..d {
                    let g = grad[j];
                    m1[base + j] = beta1 * m1[base + j] + (1.0 - beta1) * g;
                    m2[base + j] = beta2 * m2[base + j] + (1.0 - beta2) * g * g;
                    let mhat = m1[base + j] / bc1;
                    let vhat = m2[base + j] / bc2;
                    out[j] -= self.lr * mhat / (vhat.sqrt() + eps);
                }
            }
        }
    }
}

/// Mean NDCG@k and MRR@k over users, ranking the held-out item against every
/// item the user never interacted with (no sampled metrics).
pub fn evaluate(
    params: &ModelParams,
    scorer: ScorerKind,
    split: &SplitDataset,
    cutoff: usize,
    target: EvalSplit,
) -> Result<(f64, f64)> {
    if cutoff == 0 {
        return Err(Error::ZeroCutoff);
    }
    let m = split.n_items();
    let mut mask = vec![false; m];
    let mut history: Vec<usize> = Vec::new();
    let (mut ndcg_sum, mut mrr_sum) = (0.0, 0.0);
    for u in 0..split.n_users() {
        for &i in split.interacted(u) {
            mask[i] = true;
        }
        history.clear();
        history.extend_from_slice(split.train(u));
        let positive = match target {
            EvalSplit::Validation => split.validation(u),
            EvalSplit::Test => {
                // by test time the validation event is known history
                history.push(split.validation(u));
                split.test(u)
            }
        };
        let rep = representation(params, scorer, u, &history)?;
        let s_pos = dot(&rep, params.item_vec(positive));
        let mut exceed = 0;
        for (i, &seen) in mask.iter().enumerate() {
            if !seen && dot(&rep, params.item_vec(i)) >= s_pos {
                exceed += 1;
            }
        }
        let rank = Rank::new(exceed + 1).expect("rank is at least 1");
        ndcg_sum += metric_at_k(rank, cutoff, MetricKind::Ndcg)?;
        mrr_sum += metric_at_k(rank, cutoff, MetricKind::Mrr)?;
        for &i in split.interacted(u) {
            mask[i] = false;
        }
    }
    let n = split.n_users() as f64;
    Ok((ndcg_sum / n, mrr_sum / n))
}

/// Fits embeddings with the configured sampled loss.
///
/// Every epoch visits each (user, train position) once in shuffled order,
/// draws K fresh negatives from the user's non-interacted items, and applies
/// one optimizer step per mini-batch (mean gradient). Validation NDCG@k and
/// MRR@k are traced for epoch 0 (untrained) and after every epoch; the
/// returned parameters are the best-validation-NDCG snapshot, and the trace
/// ends with that snapshot's test metrics.
pub fn train(split: &SplitDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let m = split.n_items();
    for u in 0..split.n_users() {
        let available = split.available_negatives(u);
        if config.negatives > available {
            return Err(Error::NotEnoughNegatives {
                user: split.user_token(u).to_string(),
                available,
                requested: config.negatives,
            });
        }
    }

    let mut init_rng = stream_rng(config.seed, 0);
    let mut params = ModelParams::init(split.n_users(), m, config.dim, &mut init_rng)?;
    let mut rng = stream_rng(config.seed, 1);

    let masks: Vec<Vec<bool>> = (0..split.n_users())
        .map(|u| {
            let mut mask = vec![false; m];
            for &i in split.interacted(u) {
                mask[i] = true;
            }
            mask
        })
        .collect();

    // the history-mean scorer needs at least one past event, so its first
    // train position is not a usable positive
    let first_position = match config.scorer {
        ScorerKind::Factor => 0,
        ScorerKind::HistoryMean => 1,
    };
    let mut examples: Vec<(usize, usize)> = (0..split.n_users())
        .flat_map(|u| (first_position..split.train(u).len()).map(move |p| (u, p)))
        .collect();
    if examples.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let mut opt = OptimizerState::new(
        config.optimizer,
        config.learning_rate,
        split.n_users() * config.dim,
        m * config.dim,
    );

    let mut trace = Vec::new();
    let push_validation = |trace: &mut Vec<TraceRow>, epoch: usize, ndcg: f64, mrr: f64| {
        for (metric, value) in [(MetricKind::Ndcg, ndcg), (MetricKind::Mrr, mrr)] {
            trace.push(TraceRow {
                epoch,
                split: EvalSplit::Validation,
                metric,
                cutoff: config.cutoff,
                value,
            });
        }
    };

    let (ndcg0, mrr0) = evaluate(&params, config.scorer, split, config.cutoff, EvalSplit::Validation)?;
    push_validation(&mut trace, 0, ndcg0, mrr0);
    let mut best_epoch = 0;
    let mut best_ndcg = ndcg0;
    let mut best_params = params.clone();

    for epoch in 1..=config.epochs {
        examples.shuffle(&mut rng);
        for (step0, batch) in examples.chunks(config.batch_size).enumerate() {
            let step = step0 + 1;
            let mut user_grads: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            let mut item_grads: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for &(u, p) in batch {
                let seq = split.train(u);
                let negatives =
                    sample_indices_excluding(m, &masks[u], config.negatives, &mut rng)?;
                let value = accumulate_example(
                    &params,
                    config.scorer,
                    u,
                    &seq[..p],
                    seq[p],
                    &negatives,
                    config.loss,
                    &mut user_grads,
                    &mut item_grads,
                )
                .map_err(|e| match e {
                    Error::NonFiniteScore(_) => Error::Diverged { epoch, step },
                    other => other,
                })?;
                if !value.is_finite() {
                    return Err(Error::Diverged { epoch, step });
                }
            }
            let scale = 1.0 / batch.len() as f64;
            opt.begin_step();
            for (row, mut grad) in user_grads {
                for g in &mut grad {
                    *g *= scale;
                }
                opt.apply_row(Side::User, row, config.dim, &grad, params.user_vec_mut(row));
            }
            for (row, mut grad) in item_grads {
                for g in &mut grad {
                    *g *= scale;
                }
                opt.apply_row(Side::Item, row, config.dim, &grad, params.item_vec_mut(row));
            }
        }
        let (ndcg, mrr) =
            evaluate(&params, config.scorer, split, config.cutoff, EvalSplit::Validation)?;
        push_validation(&mut trace, epoch, ndcg, mrr);
        if ndcg > best_ndcg {
            best_epoch = epoch;
            best_ndcg = ndcg;
            best_params = params.clone();
        }
    }

    let (test_ndcg, test_mrr) =
        evaluate(&best_params, config.scorer, split, config.cutoff, EvalSplit::Test)?;
    for (metric, value) in [(MetricKind::Ndcg, test_ndcg), (MetricKind::Mrr, test_mrr)] {
        trace.push(TraceRow {
            epoch: best_epoch,
            split: EvalSplit::Test,
            metric,
            cutoff: config.cutoff,
            value,
        });
    }

    Ok(TrainOutcome { params: best_params, trace, best_epoch, best_validation_ndcg: best_ndcg })
}
