//! Hypergeometric distribution engine and the bound probabilities built on it.
//!
//! Drawing K negatives uniformly without replacement from a catalog of N in
//! which M score at or above the threshold makes the exceedance count
//! hypergeometric. Two evaluation paths are kept deliberately separate:
//!
//! * an exact big-rational path (binomial coefficients as big integers),
//!   used for every population up to [`EXACT_POPULATION_LIMIT`] so the
//!   inequality assertions are decided in exact arithmetic, and
//! * a floating-point path for larger populations that anchors a weight of 1
//!   at the distribution's mode, walks the support with the exact term
//!   ratios, and normalizes by the weight sum. Every factor is an O(1)
//!   integer ratio, so the error is a few ulps per support step, orders of
//!   magnitude tighter than exponentiating log-gamma differences (whose
//!   absolute error scales with the magnitude of ln Γ itself).
//!
//! A probabilistic lower bound for P(−log metric ≤ sampled loss) is
//! 1 − CDF(⌊ρ⌋), where the evaluation point ρ depends on the metric/loss
//! pair. The floor mirrors the summation cutoff in the underlying proof;
//! statements of the result that omit the floor are shorthand for the same
//! sum. ⌊ρ⌋ is computed in integer arithmetic (never through floating-point
//! logs), so boundary ranks like r₊ = 15, where log₂(log₂ 16) = 2 exactly,
//! cannot be off by an ulp.

use std::sync::OnceLock;

use num::{BigRational, BigUint, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::losses::LossKind;
use crate::metrics::MetricKind;
use crate::score::Rank;

/// Populations up to this size use exact rational arithmetic in the f64 API.
pub const EXACT_POPULATION_LIMIT: usize = 10_000;

/// Parameters (N, M, K): population size, success count, draw count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypergeomParams {
    population: usize,
    successes: usize,
    draws: usize,
}

impl HypergeomParams {
    pub fn new(population: usize, successes: usize, draws: usize) -> Result<Self> {
        if successes > population {
            return Err(Error::SuccessesExceedPopulation { successes, population });
        }
        if draws > population {
            return Err(Error::DrawsExceedPopulation { draws, population });
        }
        Ok(Self { population, successes, draws })
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn successes(&self) -> usize {
        self.successes
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    /// Inclusive support [max(0, K−(N−M)), min(K, M)] of the success count.
    pub fn support(&self) -> (usize, usize) {
        let lo = self.draws.saturating_sub(self.population - self.successes);
        let hi = self.draws.min(self.successes);
        (lo, hi)
    }

    /// Exact P(X = x) as a reduced big rational.
    pub fn pmf_exact(&self, x: i64) -> BigRational {
        let (lo, hi) = self.support();
        if x < lo as i64 || x > hi as i64 {
            return BigRational::zero();
        }
        let x = x as usize;
        let numer = binomial(self.successes, x)
            * binomial(self.population - self.successes, self.draws - x);
        BigRational::new(numer.into(), binomial(self.population, self.draws).into())
    }

    /// Exact P(X ≤ x) as a reduced big rational.
    pub fn cdf_exact(&self, x: i64) -> BigRational {
        let (lo, hi) = self.support();
        if x < lo as i64 {
            return BigRational::zero();
        }
        if x >= hi as i64 {
            return BigRational::one();
        }
        let x = x as usize;
        let n = self.population;
        let m = self.successes;
        let k = self.draws;
        // Walk the support with the exact term recurrence
        // T(i+1) = T(i)·(M−i)/(i+1)·(K−i)/(N−M−K+i+1); both divisions are
        // exact when applied right after their multiplication. The last
        // denominator is grouped as (N+i+1)−M−K, which stays positive for
        // every i in the support even when M+K exceeds N.
        let mut term = binomial(m, lo) * binomial(n - m, k - lo);
        let mut sum = term.clone();
        for i in lo..x {
            term *= BigUint::from(m - i);
            term /= BigUint::from(i + 1);
            term *= BigUint::from(k - i);
            term /= BigUint::from(n + i + 1 - m - k);
            sum += &term;
        }
        BigRational::new(sum.into(), binomial(n, k).into())
    }

    /// P(X = x); exact path for N ≤ 10⁴, normalized-ratio path beyond.
    pub fn pmf(&self, x: i64) -> f64 {
        if self.population <= EXACT_POPULATION_LIMIT {
            big_ratio_to_f64(&self.pmf_exact(x))
        } else {
            self.pmf_float(x)
        }
    }

    /// P(X ≤ x); exact path for N ≤ 10⁴, normalized-ratio path beyond.
    pub fn cdf(&self, x: i64) -> f64 {
        if self.population <= EXACT_POPULATION_LIMIT {
            big_ratio_to_f64(&self.cdf_exact(x))
        } else {
            self.cdf_float(x)
        }
    }

    /// Ratio pmf(x+1) / pmf(x); every factor is an exactly representable
    /// integer, valid for x in [lo, hi).
    fn step_ratio(&self, x: usize) -> f64 {
        let (m, k, n) = (self.successes, self.draws, self.population);
        ((m - x) as f64 * (k - x) as f64) / ((x + 1) as f64 * (n + x + 1 - m - k) as f64)
    }

    /// Unnormalized support weights with weight 1 at the mode, plus their
    /// sum. Anchoring at the mode keeps every weight in (0, 1], so nothing
    /// overflows no matter how large the binomials would be; far tails may
    /// underflow to 0, which costs nothing at f64 scale.
    fn float_weights(&self) -> (usize, Vec<f64>, f64) {
        let (lo, hi) = self.support();
        let mode =
            (((self.draws + 1) * (self.successes + 1)) / (self.population + 2)).clamp(lo, hi);
        let mut w = vec![0.0; hi - lo + 1];
        w[mode - lo] = 1.0;
        for x in mode..hi {
            w[x - lo + 1] = w[x - lo] * self.step_ratio(x);
        }
        for x in (lo..mode).rev() {
            w[x - lo] = w[x - lo + 1] / self.step_ratio(x);
        }
        let sum: f64 = w.iter().sum();
        (lo, w, sum)
    }

    fn pmf_float(&self, x: i64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo as i64 || x > hi as i64 {
            return 0.0;
        }
        let (lo, w, sum) = self.float_weights();
        w[x as usize - lo] / sum
    }

    fn cdf_float(&self, x: i64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo as i64 {
            return 0.0;
        }
        if x >= hi as i64 {
            return 1.0;
        }
        let (lo, w, sum) = self.float_weights();
        // a left-to-right prefix of the same summation chain as `sum`, so
        // the quotient can never exceed 1
        let partial: f64 = w[..=x as usize - lo].iter().sum();
        partial / sum
    }
}

/// C(n, k) as a big integer; small n served from a shared Pascal table.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    const MEMO_ROWS: usize = 65;
    static TABLE: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();
    if n < MEMO_ROWS {
        let table = TABLE.get_or_init(|| {
            let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(MEMO_ROWS);
            rows.push(vec![BigUint::one()]);
            for i in 1..MEMO_ROWS {
                let prev = &rows[i - 1];
                let mut row = vec![BigUint::one(); i + 1];
                for j in 1..i {
                    row[j] = &prev[j - 1] + &prev[j];
                }
                rows.push(row);
            }
            rows
        });
        return table[n][k].clone();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c *= BigUint::from(n - i);
        c /= BigUint::from(i + 1); // exact: C(n, i+1) is an integer
    }
    c
}

/// Round a non-negative big rational to the nearest f64 without overflowing
/// through intermediate conversions.
fn big_ratio_to_f64(r: &BigRational) -> f64 {
    let numer = r.numer().magnitude();
    let denom = r.denom().magnitude();
    if numer.is_zero() {
        return 0.0;
    }
    let top_bits = |v: &BigUint| -> (f64, i64) {
        let drop = v.bits().saturating_sub(64);
        ((v >> drop).to_f64().expect("<= 64 bits"), drop as i64)
    };
    let (nf, ns) = top_bits(numer);
    let (df, ds) = top_bits(denom);
    let v = (nf / df) * 2f64.powi((ns - ds) as i32);
    if r.numer().sign() == num::bigint::Sign::Minus {
        -v
    } else {
        v
    }
}

/// One probabilistic lower-bound query: which loss bounds which metric, at
/// which rank, under which sampling distribution.
#[derive(Debug, Clone, Copy)]
pub struct BoundProbabilityQuery {
    pub params: HypergeomParams,
    pub rank: Rank,
    pub metric: MetricKind,
    pub loss: LossKind,
}

impl BoundProbabilityQuery {
    fn validate(&self) -> Result<()> {
        // For BPR and CCE the success count is the exceedance set of the
        // positive's own score, so it is pinned to the rank; for BCE it is
        // the zero-threshold count, which the caller supplies.
        if matches!(self.loss, LossKind::Bpr | LossKind::Cce)
            && self.params.successes() != self.rank.get() - 1
        {
            return Err(Error::SuccessesRankMismatch {
                successes: self.params.successes(),
                rank: self.rank.get(),
            });
        }
        Ok(())
    }

    /// The unfloored evaluation point ρ for this metric/loss pair.
    fn evaluation_point(&self) -> f64 {
        let r = self.rank.get() as f64;
        match (self.metric, self.loss) {
            (MetricKind::Ndcg, LossKind::Bpr | LossKind::Bce) => (1.0 + r).log2().log2(),
            (MetricKind::Ndcg, LossKind::Cce) => (1.0 + r).log2(),
            (MetricKind::Mrr, LossKind::Bpr | LossKind::Bce) => r.log2(),
            (MetricKind::Mrr, LossKind::Cce) => r,
        }
    }

    /// ⌊ρ⌋ computed purely in integer arithmetic.
    ///
    /// ⌊log₂ log₂(1+r)⌋ = ⌊log₂ ⌊log₂(1+r)⌋⌋ because 2^m ≤ log₂ t is
    /// equivalent to the integer comparison 2^(2^m) ≤ t.
    fn floored_point(&self) -> i64 {
        let r = self.rank.get() as u64;
        match (self.metric, self.loss) {
            (MetricKind::Ndcg, LossKind::Bpr | LossKind::Bce) => {
                i64::from((r + 1).ilog2().ilog2())
            }
            (MetricKind::Ndcg, LossKind::Cce) => i64::from((r + 1).ilog2()),
            (MetricKind::Mrr, LossKind::Bpr | LossKind::Bce) => i64::from(r.ilog2()),
            (MetricKind::Mrr, LossKind::Cce) => r as i64,
        }
    }
}

/// A lower bound on P(−log metric ≤ sampled loss), with the evaluation
/// point it was computed at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundProbability {
    pub lower_bound: f64,
    pub evaluation_point: f64,
    pub floored_point: i64,
}

/// 1 − CDF(⌊ρ⌋) for the query's metric/loss pair.
pub fn bound_probability(query: &BoundProbabilityQuery) -> Result<BoundProbability> {
    query.validate()?;
    let floored = query.floored_point();
    let lower_bound = (1.0 - query.params.cdf(floored)).clamp(0.0, 1.0);
    Ok(BoundProbability {
        lower_bound,
        evaluation_point: query.evaluation_point(),
        floored_point: floored,
    })
}

/// Exact-rational version of [`bound_probability`]; cost grows with N.
pub fn bound_probability_exact(query: &BoundProbabilityQuery) -> Result<BigRational> {
    query.validate()?;
    Ok(BigRational::one() - query.params.cdf_exact(query.floored_point()))
}

/// The three bounds of the worst-case comparison, ordered BCE ≥ BPR ≥ CCE.
#[derive(Debug, Clone, Copy)]
pub struct WorstCaseOrdering {
    pub bce: BoundProbability,
    pub bpr: BoundProbability,
    pub cce: BoundProbability,
}

/// Bound probabilities for all three losses at one rank, asserting the
/// worst-case ordering BCE ≥ BPR ≥ CCE.
///
/// `params_gamma` carries the rank's own exceedance count (M = r₊ − 1);
/// `gamma0` is the zero-threshold count used by the BCE bound. Requiring
/// gamma0 ≥ M is the s₊ ≥ 0 regime in which the comparison is stated.
pub fn worst_case_ordering(
    params_gamma: HypergeomParams,
    gamma0: usize,
    rank: Rank,
    metric: MetricKind,
) -> Result<WorstCaseOrdering> {
    if gamma0 < params_gamma.successes() || gamma0 > params_gamma.population() {
        return Err(Error::InvalidGamma0 {
            gamma0,
            gamma: params_gamma.successes(),
            population: params_gamma.population(),
        });
    }
    let params_gamma0 =
        HypergeomParams::new(params_gamma.population(), gamma0, params_gamma.draws())?;
    let query = |params, loss| BoundProbabilityQuery { params, rank, metric, loss };
    let q_bce = query(params_gamma0, LossKind::Bce);
    let q_bpr = query(params_gamma, LossKind::Bpr);
    let q_cce = query(params_gamma, LossKind::Cce);
    let (bce, bpr, cce) = (
        bound_probability(&q_bce)?,
        bound_probability(&q_bpr)?,
        bound_probability(&q_cce)?,
    );
    let ordered = if params_gamma.population() <= EXACT_POPULATION_LIMIT {
        let (eb, ep, ec) = (
            bound_probability_exact(&q_bce)?,
            bound_probability_exact(&q_bpr)?,
            bound_probability_exact(&q_cce)?,
        );
        eb >= ep && ep >= ec
    } else {
        bce.lower_bound >= bpr.lower_bound && bpr.lower_bound >= cce.lower_bound
    };
    if !ordered {
        return Err(Error::OrderingViolation {
            bce: bce.lower_bound,
            bpr: bpr.lower_bound,
            cce: cce.lower_bound,
        });
    }
    Ok(WorstCaseOrdering { bce, bpr, cce })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num::rational::Ratio;
    use num::BigInt;
    use proptest::prelude::*;

    fn params(n: usize, m: usize, k: usize) -> HypergeomParams {
        HypergeomParams::new(n, m, k).unwrap()
    }

    fn ratio(n: i64, d: i64) -> BigRational {
        Ratio::new(BigInt::from(n), BigInt::from(d))
    }

    /// Independent oracle: count K-subsets by dynamic programming over the
    /// items (first `m` of `n` marked), never touching the binomial formula.
    fn enumeration_counts(n: usize, m: usize, k: usize) -> Vec<BigUint> {
        let mut dp = vec![vec![BigUint::zero(); k + 1]; k + 1]; // dp[chosen][marked]
        dp[0][0] = BigUint::one();
        for item in 0..n {
            let marked = item < m;
            for chosen in (0..k).rev() {
                for s in (0..=chosen).rev() {
                    if dp[chosen][s].is_zero() {
                        continue;
                    }
                    let add = dp[chosen][s].clone();
                    let target = if marked { s + 1 } else { s };
                    dp[chosen + 1][target] += add;
                }
            }
        }
        dp[k].clone()
    }

    #[test]
    fn pmf_worked_values() {
        assert_eq!(params(10, 4, 3).pmf_exact(0), ratio(1, 6));
        assert_relative_eq!(params(10, 4, 3).pmf(0), 1.0 / 6.0, max_relative = 1e-15);
        assert_eq!(params(12, 0, 5).pmf_exact(0), ratio(1, 1));
        assert_eq!(params(7, 3, 7).pmf_exact(3), ratio(1, 1));
    }

    #[test]
    fn cdf_worked_values() {
        assert_eq!(params(10, 4, 3).cdf_exact(1), ratio(2, 3));
        assert_relative_eq!(params(10, 4, 3).cdf(1), 2.0 / 3.0, max_relative = 1e-15);
        assert_eq!(params(10, 4, 3).cdf_exact(-1), BigRational::zero());
        assert_eq!(params(10, 4, 3).cdf_exact(3), BigRational::one());
    }

    #[test]
    fn exact_pmf_matches_enumeration_oracle_small_grid() {
        for n in 0..=12usize {
            for m in 0..=n {
                for k in 0..=n {
                    let counts = enumeration_counts(n, m, k);
                    let total = binomial(n, k);
                    let p = params(n, m, k);
                    for (x, count) in counts.iter().enumerate() {
                        let expected =
                            BigRational::new(count.clone().into(), total.clone().into());
                        assert_eq!(p.pmf_exact(x as i64), expected, "N={n} M={m} K={k} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_pmf_sums_to_one_at_population_limit() {
        let p = params(EXACT_POPULATION_LIMIT, 137, 59);
        let (lo, hi) = p.support();
        let mut sum = BigRational::zero();
        for x in lo..=hi {
            sum += p.pmf_exact(x as i64);
        }
        assert_eq!(sum, BigRational::one());
        assert_eq!(p.cdf_exact(hi as i64), BigRational::one());
    }

    #[test]
    fn float_path_sums_to_one_beyond_exact_limit() {
        for (n, m, k) in [(100_000, 400, 40), (1_000_000, 12, 300), (50_000, 50_000, 17)] {
            let p = params(n, m, k);
            let (lo, hi) = p.support();
            let sum: f64 = (lo..=hi).map(|x| p.pmf_float(x as i64)).sum();
            assert!((sum - 1.0).abs() <= 1e-12, "N={n} M={m} K={k}: sum={sum}");
        }
    }

    #[test]
    fn float_path_agrees_with_exact_path() {
        for (n, m, k) in [(10, 4, 3), (100, 30, 12), (2_000, 900, 55), (10_000, 123, 77)] {
            let p = params(n, m, k);
            let (lo, hi) = p.support();
            for x in lo..=hi.min(lo + 40) {
                let exact = big_ratio_to_f64(&p.pmf_exact(x as i64));
                let float = p.pmf_float(x as i64);
                if exact > 1e-300 {
                    assert_relative_eq!(float, exact, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(matches!(
            HypergeomParams::new(5, 6, 1),
            Err(Error::SuccessesExceedPopulation { .. })
        ));
        assert!(matches!(
            HypergeomParams::new(5, 2, 6),
            Err(Error::DrawsExceedPopulation { .. })
        ));
    }

    fn query(n: usize, m: usize, k: usize, r: usize, metric: MetricKind, loss: LossKind) -> BoundProbabilityQuery {
        BoundProbabilityQuery {
            params: params(n, m, k),
            rank: Rank::new(r).unwrap(),
            metric,
            loss,
        }
    }

    #[test]
    fn bound_probability_worked_values() {
        let b = bound_probability(&query(10, 4, 3, 5, MetricKind::Ndcg, LossKind::Bpr)).unwrap();
        assert_relative_eq!(b.evaluation_point, (6.0f64).log2().log2(), max_relative = 1e-15);
        assert_eq!(b.floored_point, 1);
        assert_relative_eq!(b.lower_bound, 1.0 / 3.0, max_relative = 1e-15);

        let b = bound_probability(&query(10, 4, 3, 5, MetricKind::Ndcg, LossKind::Cce)).unwrap();
        assert_relative_eq!(b.evaluation_point, (6.0f64).log2(), max_relative = 1e-15);
        assert_eq!(b.floored_point, 2);
        assert_relative_eq!(b.lower_bound, 1.0 / 30.0, max_relative = 1e-14);

        // r₊ = 1: ρ = 0, bound is the upper tail past zero successes
        let b = bound_probability(&query(10, 0, 3, 1, MetricKind::Ndcg, LossKind::Bpr)).unwrap();
        assert_eq!(b.floored_point, 0);
        assert_eq!(b.lower_bound, 0.0);
        let p = params(10, 2, 3);
        let b = bound_probability(&BoundProbabilityQuery {
            params: p,
            rank: Rank::new(1).unwrap(),
            metric: MetricKind::Ndcg,
            loss: LossKind::Bce, // successes free for BCE: here |Γ₀| = 2
        })
        .unwrap();
        assert_relative_eq!(b.lower_bound, 1.0 - big_ratio_to_f64(&p.pmf_exact(0)), max_relative = 1e-15);
    }

    #[test]
    fn successes_must_match_rank_for_bpr_and_cce() {
        let err = bound_probability(&query(10, 3, 3, 5, MetricKind::Ndcg, LossKind::Bpr));
        assert!(matches!(err, Err(Error::SuccessesRankMismatch { .. })));
        // BCE carries |Γ₀|, which is free of the rank
        assert!(bound_probability(&query(10, 3, 3, 5, MetricKind::Ndcg, LossKind::Bce)).is_ok());
    }

    #[test]
    fn floored_points_at_integer_boundaries() {
        let fp = |r: usize, metric, loss| {
            let m = if matches!(loss, LossKind::Bce) { 0 } else { r - 1 };
            query(100, m, 10, r, metric, loss).floored_point()
        };
        // ndcg/bpr: largest m with 2^(2^m) ≤ r+1
        assert_eq!(fp(1, MetricKind::Ndcg, LossKind::Bpr), 0);
        assert_eq!(fp(2, MetricKind::Ndcg, LossKind::Bpr), 0);
        assert_eq!(fp(3, MetricKind::Ndcg, LossKind::Bpr), 1);
        assert_eq!(fp(14, MetricKind::Ndcg, LossKind::Bpr), 1);
        assert_eq!(fp(15, MetricKind::Ndcg, LossKind::Bpr), 2);
        assert_eq!(fp(16, MetricKind::Ndcg, LossKind::Bpr), 2);
        // ndcg/cce: ⌊log₂(1+r)⌋
        assert_eq!(fp(5, MetricKind::Ndcg, LossKind::Cce), 2);
        assert_eq!(fp(7, MetricKind::Ndcg, LossKind::Cce), 3);
        // mrr: ⌊log₂ r⌋ for bpr/bce, r itself for cce
        assert_eq!(fp(1, MetricKind::Mrr, LossKind::Bpr), 0);
        assert_eq!(fp(8, MetricKind::Mrr, LossKind::Bpr), 3);
        assert_eq!(fp(9, MetricKind::Mrr, LossKind::Cce), 9);
    }

    #[test]
    fn worst_case_ordering_worked_values() {
        let w = worst_case_ordering(params(10, 4, 3), 4, Rank::new(5).unwrap(), MetricKind::Ndcg)
            .unwrap();
        assert_relative_eq!(w.bce.lower_bound, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(w.bpr.lower_bound, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(w.cce.lower_bound, 1.0 / 30.0, max_relative = 1e-14);

        let w = worst_case_ordering(params(10, 2, 3), 8, Rank::new(3).unwrap(), MetricKind::Ndcg)
            .unwrap();
        assert!(w.bce.lower_bound >= w.bpr.lower_bound);

        // degenerate |Γ| = 0
        let w = worst_case_ordering(params(10, 0, 3), 5, Rank::new(1).unwrap(), MetricKind::Ndcg)
            .unwrap();
        assert_eq!(w.bpr.lower_bound, 0.0);
        assert!(w.bce.lower_bound >= 0.0);

        assert!(matches!(
            worst_case_ordering(params(10, 4, 3), 3, Rank::new(5).unwrap(), MetricKind::Ndcg),
            Err(Error::InvalidGamma0 { .. })
        ));
    }

    proptest! {
        #[test]
        fn pmf_sums_to_one_exactly(n in 0usize..140, seed in (0usize..10_000, 0usize..10_000)) {
            let m = if n == 0 { 0 } else { seed.0 % (n + 1) };
            let k = if n == 0 { 0 } else { seed.1 % (n + 1) };
            let p = params(n, m, k);
            let (lo, hi) = p.support();
            let mut sum = BigRational::zero();
            for x in lo..=hi {
                sum += p.pmf_exact(x as i64);
            }
            prop_assert_eq!(sum, BigRational::one());
        }

        #[test]
        fn cdf_is_monotone_in_x(n in 1usize..80, seed in (0usize..10_000, 0usize..10_000)) {
            let m = seed.0 % (n + 1);
            let k = seed.1 % (n + 1);
            let p = params(n, m, k);
            let mut prev = BigRational::zero();
            for x in 0..=k {
                let c = p.cdf_exact(x as i64);
                prop_assert!(c >= prev);
                prev = c;
            }
        }

        #[test]
        fn bound_is_monotone_in_draws(
            n in 2usize..60,
            seed in (1usize..10_000, 0usize..10_000, 0u8..2, 0u8..3),
        ) {
            let r = 1 + seed.0 % n; // rank in 1..=n, so M = r-1 <= n-1
            let metric = if seed.2 == 0 { MetricKind::Ndcg } else { MetricKind::Mrr };
            let loss = LossKind::ALL[seed.3 as usize];
            let m = match loss {
                LossKind::Bce => seed.1 % (n + 1),
                _ => r - 1,
            };
            let mut prev = BigRational::zero();
            for k in 0..=n {
                let q = BoundProbabilityQuery {
                    params: params(n, m, k),
                    rank: Rank::new(r).unwrap(),
                    metric,
                    loss,
                };
                let b = bound_probability_exact(&q).unwrap();
                prop_assert!(b >= prev, "bound must be non-decreasing in K");
                prev = b;
            }
        }
    }
}
