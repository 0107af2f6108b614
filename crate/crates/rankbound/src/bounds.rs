//! End-to-end verification harness for the loss/metric bound chain.
//!
//! Three layers, matching how the theory is stated:
//!
//! * deterministic inequalities on one score configuration
//!   ([`verify_full_chain`] for −log NDCG ≤ CCE ≤ BPR (≤ BCE when s₊ ≥ 0),
//!   [`verify_sampled_lower_bounds`] for the per-loss Γ-count lower bounds),
//! * Monte Carlo estimation of P(−log metric ≤ sampled loss) against its
//!   hypergeometric lower bound ([`monte_carlo_bound_check`]); the event
//!   compares the sampled loss against the TRUE rank from the full
//!   population, which is exactly the asymmetry the probabilistic statement
//!   is about,
//! * dense bound surfaces over (K, r₊) grids ([`bound_surface`]).
//!
//! All inequality checks allow an absolute slack of 1e-9: the statements are
//! exact in real arithmetic, the slack covers accumulated rounding only.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergeom::{bound_probability, BoundProbability, BoundProbabilityQuery, HypergeomParams};
use crate::losses::{loss_value, LossKind};
use crate::metrics::{neg_log_metric, MetricKind};
use crate::sampling::{sample_indices, stream_rng, SamplerConfig};
use crate::score::{compute_gamma_counts, compute_rank, ScoreSet};

/// Absolute slack for float comparisons of exact real-arithmetic inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Outcome of the full-loss inequality chain on one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainCheck {
    pub neg_log_ndcg: f64,
    pub cce: f64,
    pub bpr: f64,
    pub bce: f64,
    pub ndcg_le_cce: bool,
    pub cce_le_bpr: bool,
    /// None when s₊ < 0; the BCE link is only claimed for s₊ ≥ 0.
    pub bpr_le_bce: Option<bool>,
}

impl ChainCheck {
    pub fn holds(&self) -> bool {
        self.ndcg_le_cce && self.cce_le_bpr && self.bpr_le_bce.unwrap_or(true)
    }
}

/// Checks −log NDCG(r₊) ≤ CCE ≤ BPR on a full score set, and BPR ≤ BCE
/// when s₊ ≥ 0.
pub fn verify_full_chain(scores: &ScoreSet) -> Result<ChainCheck> {
    if scores.is_sampled() {
        return Err(Error::ExpectedFullScores);
    }
    let rank = compute_rank(scores);
    let neg_log_ndcg = neg_log_metric(MetricKind::Ndcg, rank);
    let cce = loss_value(LossKind::Cce, scores);
    let bpr = loss_value(LossKind::Bpr, scores);
    let bce = loss_value(LossKind::Bce, scores);
    Ok(ChainCheck {
        neg_log_ndcg,
        cce,
        bpr,
        bce,
        ndcg_le_cce: neg_log_ndcg <= cce + INEQUALITY_SLACK,
        cce_le_bpr: cce <= bpr + INEQUALITY_SLACK,
        bpr_le_bce: (scores.positive() >= 0.0).then_some(bpr <= bce + INEQUALITY_SLACK),
    })
}

/// Outcome of the sampled-loss lower bounds on one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledBoundsCheck {
    pub gamma_k: usize,
    pub gamma0_k: usize,
    pub bpr_holds: bool,
    pub bce_holds: bool,
    pub cce_holds: bool,
    /// True when |Γᴷ| = 0, where the CCE bound says nothing (ln 0 = −∞).
    pub cce_vacuous: bool,
}

impl SampledBoundsCheck {
    pub fn holds(&self) -> bool {
        self.bpr_holds && self.bce_holds && self.cce_holds
    }
}

/// Checks BPR ≥ |Γᴷ| ln 2, BCE ≥ |Γᴷ₀| ln 2, and CCE ≥ ln |Γᴷ| when
/// |Γᴷ| ≥ 1, on a sampled score set.
pub fn verify_sampled_lower_bounds(scores: &ScoreSet) -> Result<SampledBoundsCheck> {
    if !scores.is_sampled() {
        return Err(Error::ExpectedSampledScores);
    }
    let g = compute_gamma_counts(scores);
    let ln2 = std::f64::consts::LN_2;
    let bpr = loss_value(LossKind::Bpr, scores);
    let bce = loss_value(LossKind::Bce, scores);
    let cce = loss_value(LossKind::Cce, scores);
    let cce_vacuous = g.gamma_k == 0;
    Ok(SampledBoundsCheck {
        gamma_k: g.gamma_k,
        gamma0_k: g.gamma0_k,
        bpr_holds: bpr >= g.gamma_k as f64 * ln2 - INEQUALITY_SLACK,
        bce_holds: bce >= g.gamma0_k as f64 * ln2 - INEQUALITY_SLACK,
        cce_holds: cce_vacuous || cce >= (g.gamma_k as f64).ln() - INEQUALITY_SLACK,
        cce_vacuous,
    })
}

/// Per-loss outcome of one Monte Carlo bound check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheckRow {
    pub loss: LossKind,
    /// Trials on which the deterministic sampled lower bounds held.
    pub deterministic_passes: usize,
    /// Empirical frequency of −log metric(r₊) ≤ sampled loss.
    pub frequency: f64,
    pub theoretical_bound: f64,
    /// Binomial standard error √(p̂(1−p̂)/trials).
    pub std_err: f64,
    /// frequency ≥ theoretical_bound − 3·std_err
    pub holds: bool,
}

/// One Monte Carlo scenario: the population, the sampling setup, and the
/// three per-loss bound rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub population: usize,
    pub k: usize,
    pub trials: usize,
    pub metric: MetricKind,
    pub rank: usize,
    pub gamma0: usize,
    pub rows: Vec<BoundCheckRow>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.holds && r.deterministic_passes == self.trials)
    }
}

/// Samples K negatives `trials` times and compares the frequency of
/// −log metric(r₊) ≤ ℓ against the hypergeometric lower bound, per loss.
///
/// r₊, |Γ| and |Γ₀| are taken from the full population; only the loss is
/// sampled. Trial t draws on stream t of the config's seed, so the result
/// is independent of how trials are sharded across threads.
pub fn monte_carlo_bound_check(
    full_scores: &ScoreSet,
    config: &SamplerConfig,
    metric: MetricKind,
    trials: usize,
) -> Result<BoundReport> {
    if full_scores.is_sampled() {
        return Err(Error::ExpectedFullScores);
    }
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    if config.k == 0 {
        return Err(Error::ZeroSampleSize);
    }
    let negatives = full_scores.negatives();
    if config.k > negatives.len() {
        return Err(Error::SampleTooLarge { k: config.k, population: negatives.len() });
    }

    let rank = compute_rank(full_scores);
    let gamma = compute_gamma_counts(full_scores);
    let gamma0 = gamma.population_gamma0.expect("full score set");
    let target = neg_log_metric(metric, rank);

    let theoretical = |loss: LossKind| -> Result<BoundProbability> {
        let successes = match loss {
            LossKind::Bce => gamma0,
            LossKind::Bpr | LossKind::Cce => rank.get() - 1,
        };
        let params = HypergeomParams::new(negatives.len(), successes, config.k)?;
        bound_probability(&BoundProbabilityQuery { params, rank, metric, loss })
    };

    // per trial: 3 event hits + 3 deterministic-bound passes
    let (events, det_passes) = (0..trials as u64)
        .into_par_iter()
        .fold(
            || ([0usize; 3], [0usize; 3]),
            |(mut ev, mut det), trial| {
                let mut rng = stream_rng(config.seed, trial);
                let picked = sample_indices(negatives.len(), config.k, &mut rng);
                let sampled_negs: Vec<f64> = picked.iter().map(|&i| negatives[i]).collect();
                let sampled = ScoreSet::sampled(full_scores.positive(), sampled_negs)
                    .expect("subset of a valid score set");
                let checks = verify_sampled_lower_bounds(&sampled).expect("sampled set");
                // same order as LossKind::ALL
                let checks_ok = [checks.bce_holds, checks.bpr_holds, checks.cce_holds];
                for (idx, loss) in LossKind::ALL.iter().enumerate() {
                    if target <= loss_value(*loss, &sampled) {
                        ev[idx] += 1;
                    }
                    if checks_ok[idx] {
                        det[idx] += 1;
                    }
                }
                (ev, det)
            },
        )
        .reduce(
            || ([0usize; 3], [0usize; 3]),
            |(mut ae, mut ad), (be, bd)| {
                for i in 0..3 {
                    ae[i] += be[i];
                    ad[i] += bd[i];
                }
                (ae, ad)
            },
        );

    let mut rows = Vec::with_capacity(3);
    for (idx, loss) in LossKind::ALL.iter().enumerate() {
        let frequency = events[idx] as f64 / trials as f64;
        let bound = theoretical(*loss)?.lower_bound;
        let std_err = (frequency * (1.0 - frequency) / trials as f64).sqrt();
        rows.push(BoundCheckRow {
            loss: *loss,
            deterministic_passes: det_passes[idx],
            frequency,
            theoretical_bound: bound,
            std_err,
            holds: frequency >= bound - 3.0 * std_err,
        });
    }
    Ok(BoundReport {
        population: negatives.len(),
        k: config.k,
        trials,
        metric,
        rank: rank.get(),
        gamma0,
        rows,
    })
}

/// One cell of a bound surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCell {
    pub k: usize,
    pub r_plus: usize,
    pub loss: LossKind,
    pub metric: MetricKind,
    pub lower_bound: f64,
}

/// Dense grid of lower bounds over K × r₊ for each requested loss.
///
/// The success count is the worst case for every loss: M = r₊ − 1, which
/// for BCE means assuming |Γ₀| = |Γ| (its bound only grows from there).
pub fn bound_surface(
    population: usize,
    k_list: &[usize],
    rank_list: &[usize],
    metric: MetricKind,
    losses: &[LossKind],
) -> Result<Vec<SurfaceCell>> {
    if k_list.is_empty() {
        return Err(Error::EmptyList("K"));
    }
    if rank_list.is_empty() {
        return Err(Error::EmptyList("rank"));
    }
    if losses.is_empty() {
        return Err(Error::EmptyList("loss"));
    }
    let mut cells = Vec::with_capacity(k_list.len() * rank_list.len() * losses.len());
    for &k in k_list {
        for &r in rank_list {
            let rank = crate::score::Rank::new(r)?;
            let params = HypergeomParams::new(population, r - 1, k)?;
            for &loss in losses {
                let b = bound_probability(&BoundProbabilityQuery { params, rank, metric, loss })?;
                cells.push(SurfaceCell { k, r_plus: r, loss, metric, lower_bound: b.lower_bound });
            }
        }
    }
    Ok(cells)
}

/// Writes surface cells as `K,r_plus,loss,metric,lower_bound`.
pub fn write_surface_csv<W: Write>(cells: &[SurfaceCell], mut w: W) -> std::io::Result<()> {
    writeln!(w, "K,r_plus,loss,metric,lower_bound")?;
    for c in cells {
        writeln!(w, "{},{},{},{},{}", c.k, c.r_plus, c.loss, c.metric, c.lower_bound)?;
    }
    Ok(())
}

/// Writes Monte Carlo rows as `loss,metric,trials,frequency,theoretical_bound,std_err`.
pub fn write_monte_carlo_csv<W: Write>(reports: &[BoundReport], mut w: W) -> std::io::Result<()> {
    writeln!(w, "loss,metric,trials,frequency,theoretical_bound,std_err")?;
    for report in reports {
        for r in &report.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.loss, report.metric, report.trials, r.frequency, r.theoretical_bound, r.std_err
            )?;
        }
    }
    Ok(())
}

/// Score distributions for fuzzing, including an adversarial near-tie mode
/// that lands many negatives exactly on s₊ and exactly on 0 to exercise the
/// ≥ boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreGenerator {
    Uniform,
    Gaussian,
    NearTies,
}

impl ScoreGenerator {
    pub const ALL: [ScoreGenerator; 3] =
        [ScoreGenerator::Uniform, ScoreGenerator::Gaussian, ScoreGenerator::NearTies];

    pub fn name(self) -> &'static str {
        match self {
            ScoreGenerator::Uniform => "uniform",
            ScoreGenerator::Gaussian => "gaussian",
            ScoreGenerator::NearTies => "near-ties",
        }
    }

    /// One positive score and `n` negatives from this distribution.
    pub fn generate(self, n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> (f64, Vec<f64>) {
        match self {
            ScoreGenerator::Uniform => {
                let pos = rng.random_range(-5.0..5.0);
                (pos, (0..n).map(|_| rng.random_range(-5.0..5.0)).collect())
            }
            ScoreGenerator::Gaussian => {
                let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
                    2.0 * rng.sample::<f64, _>(StandardNormal)
                };
                let pos = draw(rng);
                (pos, (0..n).map(|_| draw(rng)).collect())
            }
            ScoreGenerator::NearTies => {
                let pos = rng.random_range(-1.0..1.0);
                let negs = (0..n)
                    .map(|_| match rng.random_range(0..4u8) {
                        0 | 1 => pos,
                        2 => 0.0,
                        _ => rng.random_range(-1.0..1.0),
                    })
                    .collect();
                (pos, negs)
            }
        }
    }
}

/// A fuzz counterexample, kept verbatim so it can be printed and replayed.
#[derive(Debug, Clone)]
pub struct FuzzFailure {
    pub generator: &'static str,
    pub case_index: u64,
    pub scores: ScoreSet,
    pub detail: String,
}

fn fuzz_case_scores(seed: u64, case: u64, sampled: bool, nonneg_positive: bool) -> ScoreSet {
    let mut rng = stream_rng(seed, case);
    let generator = ScoreGenerator::ALL[(case % 3) as usize];
    let n = rng.random_range(1..=64usize);
    let (mut pos, negs) = generator.generate(n, &mut rng);
    if nonneg_positive {
        pos = pos.abs();
    }
    if sampled {
        ScoreSet::sampled(pos, negs).expect("generated scores are finite")
    } else {
        ScoreSet::full(pos, negs).expect("generated scores are finite")
    }
}

/// Runs `cases` random full-chain checks; returns the first failure if any.
///
/// Case i uses stream i of `seed` and cycles through the three generators,
/// with s₊ folded to ≥ 0 so the BCE link is exercised on every case.
pub fn fuzz_full_chain(cases: usize, seed: u64) -> Option<FuzzFailure> {
    (0..cases as u64).into_par_iter().find_map_first(|case| {
        let scores = fuzz_case_scores(seed, case, false, true);
        let check = verify_full_chain(&scores).expect("full score set");
        if check.holds() {
            None
        } else {
            Some(FuzzFailure {
                generator: ScoreGenerator::ALL[(case % 3) as usize].name(),
                case_index: case,
                scores,
                detail: format!(
                    "-log ndcg={} cce={} bpr={} bce={}",
                    check.neg_log_ndcg, check.cce, check.bpr, check.bce
                ),
            })
        }
    })
}

/// Runs `cases` random sampled-lower-bound checks; first failure if any.
pub fn fuzz_sampled_bounds(cases: usize, seed: u64) -> Option<FuzzFailure> {
    (0..cases as u64).into_par_iter().find_map_first(|case| {
        let scores = fuzz_case_scores(seed, case, true, false);
        let check = verify_sampled_lower_bounds(&scores).expect("sampled score set");
        if check.holds() {
            None
        } else {
            Some(FuzzFailure {
                generator: ScoreGenerator::ALL[(case % 3) as usize].name(),
                case_index: case,
                scores,
                detail: format!(
                    "gamma_k={} gamma0_k={} bpr_ok={} bce_ok={} cce_ok={}",
                    check.gamma_k,
                    check.gamma0_k,
                    check.bpr_holds,
                    check.bce_holds,
                    check.cce_holds
                ),
            })
        }
    })
}

/// Builds a full population with a prescribed true rank and |Γ₀|.
///
/// s₊ = 1; r₊ − 1 negatives sit above at 2, γ₀ − (r₊ − 1) more sit in
/// [0, s₊) at 0.5, the rest at −1.
pub fn population_with_counts(n: usize, r_plus: usize, gamma0: usize) -> Result<ScoreSet> {
    let rank = crate::score::Rank::new(r_plus)?;
    let gamma = rank.get() - 1;
    if gamma > gamma0 || gamma0 > n {
        return Err(Error::InvalidGamma0 { gamma0, gamma, population: n });
    }
    if gamma > n {
        return Err(Error::SuccessesExceedPopulation { successes: gamma, population: n });
    }
    let mut negs = vec![2.0; gamma];
    negs.extend(vec![0.5; gamma0 - gamma]);
    negs.resize(n, -1.0);
    ScoreSet::full(1.0, negs)
}
