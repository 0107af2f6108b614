//! Uniform without-replacement negative sampling.
//!
//! Draws are keyed by a (seed, stream_index) pair on a counter-based RNG, so
//! parallel workers and repeated runs never share or lose a stream. Two
//! interchangeable strategies cover both density extremes: a partial
//! Fisher–Yates shuffle when the requested fraction exceeds 1/64 of the
//! population, rejection sampling into a hash set otherwise. Either way
//! every k-subset is equally likely and the output order is the draw order.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::score::ScoreSet;

/// Sample size K and the base seed of the stream family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub k: usize,
    pub seed: u64,
}

/// Which exceedance condition a sampled negative is counted under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaCondition {
    /// s_i ≥ s₊
    VsPositive,
    /// s_i ≥ 0
    VsZero,
}

/// The RNG for one (seed, stream_index) pair.
pub fn stream_rng(seed: u64, stream_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_index);
    rng
}

/// Uniform k-subset of 0..n in draw order.
pub fn sample_indices(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    debug_assert!(k <= n);
    if k * 64 > n {
        // partial Fisher-Yates over an index array
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    } else {
        let mut seen = HashSet::with_capacity(k * 2);
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let candidate = rng.random_range(0..n);
            if seen.insert(candidate) {
                out.push(candidate);
            }
        }
        out
    }
}

/// Uniform k-subset of the unexcluded indices of 0..catalog, in draw order.
///
/// The trainer uses this with a per-user interaction mask; `excluded[i]`
/// marks item i as off-limits.
pub fn sample_indices_excluding(
    catalog: usize,
    excluded: &[bool],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    debug_assert_eq!(excluded.len(), catalog);
    if k == 0 {
        return Err(Error::ZeroSampleSize);
    }
    let available = catalog - excluded.iter().filter(|&&e| e).count();
    if k > available {
        return Err(Error::SampleTooLarge { k, population: available });
    }
    if k * 64 > available {
        let pool: Vec<usize> = (0..catalog).filter(|&i| !excluded[i]).collect();
        let mut picked = sample_indices(pool.len(), k, rng);
        for p in &mut picked {
            *p = pool[*p];
        }
        Ok(picked)
    } else {
        let mut seen = HashSet::with_capacity(k * 2);
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let candidate = rng.random_range(0..catalog);
            if !excluded[candidate] && seen.insert(candidate) {
                out.push(candidate);
            }
        }
        Ok(out)
    }
}

/// Draws k distinct ids from the population; deterministic per
/// (seed, stream_index).
pub fn sample_negatives<T: Copy>(
    population: &[T],
    config: &SamplerConfig,
    stream_index: u64,
) -> Result<Vec<T>> {
    if config.k == 0 {
        return Err(Error::ZeroSampleSize);
    }
    if config.k > population.len() {
        return Err(Error::SampleTooLarge { k: config.k, population: population.len() });
    }
    let mut rng = stream_rng(config.seed, stream_index);
    Ok(sample_indices(population.len(), config.k, &mut rng)
        .into_iter()
        .map(|i| population[i])
        .collect())
}

/// Monte Carlo histogram of the exceedance count among k sampled negatives.
///
/// Runs `trials` independent draws from the full population (trial t uses
/// stream index t of the config's seed; trials are sharded across threads)
/// and returns counts over {0..k}.
pub fn sample_gamma_count(
    full_scores: &ScoreSet,
    config: &SamplerConfig,
    condition: GammaCondition,
    trials: usize,
) -> Result<Vec<u64>> {
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
    let threshold = match condition {
        GammaCondition::VsPositive => full_scores.positive(),
        GammaCondition::VsZero => 0.0,
    };
    let histogram = (0..trials as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; config.k + 1],
            |mut hist, trial| {
                let mut rng = stream_rng(config.seed, trial);
                let hits = sample_indices(negatives.len(), config.k, &mut rng)
                    .into_iter()
                    .filter(|&i| negatives[i] >= threshold)
                    .count();
                hist[hits] += 1;
                hist
            },
        )
        .reduce(
            || vec![0u64; config.k + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(histogram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergeom::HypergeomParams;
    use num::ToPrimitive;

    #[test]
    fn exhaustive_draw_returns_whole_population() {
        let config = SamplerConfig { k: 5, seed: 7 };
        let mut got = sample_negatives(&[1u32, 2, 3, 4, 5], &config, 0).unwrap();
        got.sort_unstable();
        assert_eq!(got, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn singleton_population() {
        let config = SamplerConfig { k: 1, seed: 0 };
        assert_eq!(sample_negatives(&[7u32], &config, 3).unwrap(), vec![7]);
    }

    #[test]
    fn deterministic_per_seed_and_stream() {
        let pop: Vec<u32> = (1..=10).collect();
        let config = SamplerConfig { k: 3, seed: 42 };
        let a = sample_negatives(&pop, &config, 5).unwrap();
        let b = sample_negatives(&pop, &config, 5).unwrap();
        assert_eq!(a, b);
        let c = sample_negatives(&pop, &config, 6).unwrap();
        assert_ne!(a, c, "distinct streams should diverge on a 10-choose-3 draw");
    }

    #[test]
    fn oversized_and_zero_requests_fail() {
        let config = SamplerConfig { k: 4, seed: 0 };
        assert!(matches!(
            sample_negatives(&[1u32, 2, 3], &config, 0),
            Err(Error::SampleTooLarge { k: 4, population: 3 })
        ));
        let config = SamplerConfig { k: 0, seed: 0 };
        assert!(matches!(
            sample_negatives(&[1u32, 2, 3], &config, 0),
            Err(Error::ZeroSampleSize)
        ));
    }

    #[test]
    fn draws_are_distinct_in_both_regimes() {
        for (n, k) in [(40usize, 10usize), (10_000, 8)] {
            let pop: Vec<usize> = (0..n).collect();
            let config = SamplerConfig { k, seed: 11 };
            for stream in 0..200 {
                let mut got = sample_negatives(&pop, &config, stream).unwrap();
                got.sort_unstable();
                got.dedup();
                assert_eq!(got.len(), k);
            }
        }
    }

    #[test]
    fn marginal_uniformity_fisher_yates_regime() {
        let n = 40;
        let k = 10;
        let trials = 20_000u64;
        let mut counts = vec![0u64; n];
        let config = SamplerConfig { k, seed: 3 };
        let pop: Vec<usize> = (0..n).collect();
        for t in 0..trials {
            for i in sample_negatives(&pop, &config, t).unwrap() {
                counts[i] += 1;
            }
        }
        let p = k as f64 / n as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / trials as f64;
            assert!((freq - p).abs() <= 3.0 * sigma, "element {i}: freq {freq} vs p {p}");
        }
    }

    #[test]
    fn marginal_uniformity_rejection_regime() {
        let n = 1_000;
        let k = 2; // k/n < 1/64 forces the rejection branch
        let trials = 100_000u64;
        let mut counts = vec![0u64; n];
        let config = SamplerConfig { k, seed: 9 };
        let pop: Vec<usize> = (0..n).collect();
        for t in 0..trials {
            for i in sample_negatives(&pop, &config, t).unwrap() {
                counts[i] += 1;
            }
        }
        let p = k as f64 / n as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let worst = counts
            .iter()
            .map(|&c| (c as f64 / trials as f64 - p).abs())
            .fold(0.0f64, f64::max);
        // 1000 elements, allow a 4-sigma worst case
        assert!(worst <= 4.0 * sigma, "worst marginal deviation {worst} vs sigma {sigma}");
    }

    #[test]
    fn excluding_mask_never_yields_excluded_items() {
        let catalog = 50;
        let excluded: Vec<bool> = (0..catalog).map(|i| i % 3 == 0).collect();
        let mut rng = stream_rng(1, 0);
        for _ in 0..500 {
            for k in [1usize, 5, 30] {
                let got = sample_indices_excluding(catalog, &excluded, k, &mut rng).unwrap();
                assert_eq!(got.len(), k);
                assert!(got.iter().all(|&i| !excluded[i]));
                let mut sorted = got.clone();
                sorted.sort_unstable();
                sorted.dedup();
                assert_eq!(sorted.len(), k);
            }
        }
        // 17 available items, asking for more must fail
        let excluded = vec![true; 33]
            .into_iter()
            .chain(vec![false; 17])
            .collect::<Vec<_>>();
        assert!(matches!(
            sample_indices_excluding(50, &excluded, 18, &mut rng),
            Err(Error::SampleTooLarge { .. })
        ));
    }

    #[test]
    fn gamma_histogram_degenerate_cases() {
        let all_below = ScoreSet::full(5.0, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let config = SamplerConfig { k: 2, seed: 0 };
        let hist =
            sample_gamma_count(&all_below, &config, GammaCondition::VsPositive, 500).unwrap();
        assert_eq!(hist, vec![500, 0, 0]);

        let all_nonneg = ScoreSet::full(0.5, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let config = SamplerConfig { k: 5, seed: 0 };
        let hist =
            sample_gamma_count(&all_nonneg, &config, GammaCondition::VsZero, 500).unwrap();
        assert_eq!(hist[5], 500);
        assert_eq!(hist[..5].iter().sum::<u64>(), 0);
    }

    #[test]
    fn gamma_histogram_matches_hypergeometric() {
        // 4 of 10 negatives at or above the positive
        let scores = ScoreSet::full(
            1.0,
            vec![1.5, 1.2, 1.0, 2.0, 0.5, 0.4, 0.3, 0.2, 0.1, -0.5],
        )
        .unwrap();
        let config = SamplerConfig { k: 3, seed: 123 };
        let trials = 200_000;
        let hist =
            sample_gamma_count(&scores, &config, GammaCondition::VsPositive, trials).unwrap();
        assert_eq!(hist.iter().sum::<u64>(), trials as u64);
        let params = HypergeomParams::new(10, 4, 3).unwrap();
        for (x, &count) in hist.iter().enumerate() {
            let expected = params.pmf_exact(x as i64).to_f64().unwrap();
            let freq = count as f64 / trials as f64;
            assert!(
                (freq - expected).abs() <= 0.01,
                "x={x}: empirical {freq} vs exact {expected}"
            );
        }
        // the worked case: P(0) = 1/6
        assert!((hist[0] as f64 / trials as f64 - 1.0 / 6.0).abs() <= 0.01);
    }

    #[test]
    fn gamma_histogram_rejects_bad_inputs() {
        let sampled = ScoreSet::sampled(0.0, vec![1.0]).unwrap();
        let config = SamplerConfig { k: 1, seed: 0 };
        assert!(matches!(
            sample_gamma_count(&sampled, &config, GammaCondition::VsZero, 10),
            Err(Error::ExpectedFullScores)
        ));
        let full = ScoreSet::full(0.0, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            sample_gamma_count(&full, &config, GammaCondition::VsZero, 0),
            Err(Error::ZeroTrials)
        ));
    }
}
