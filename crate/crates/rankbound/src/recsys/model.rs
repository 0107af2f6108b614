//! Embedding storage and the two scorers.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// How a (user, history, item) triple is turned into a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScorerKind {
    /// user embedding · item embedding
    Factor,
    /// (mean of the history's item embeddings) · item embedding
    HistoryMean,
}

impl ScorerKind {
    pub const ALL: [ScorerKind; 2] = [ScorerKind::Factor, ScorerKind::HistoryMean];

    pub fn name(self) -> &'static str {
        match self {
            ScorerKind::Factor => "factor",
            ScorerKind::HistoryMean => "history-mean",
        }
    }
}

impl std::fmt::Display for ScorerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// User and item embedding matrices, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    d: usize,
    n_users: usize,
    n_items: usize,
    user_embeddings: Vec<f64>,
    item_embeddings: Vec<f64>,
}

impl ModelParams {
    /// Random initialization, every coordinate 0.1 · N(0, 1).
    pub fn init(n_users: usize, n_items: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDim);
        }
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        Ok(ModelParams {
            d,
            n_users,
            n_items,
            user_embeddings: draw(n_users * d),
            item_embeddings: draw(n_items * d),
        })
    }

    /// Wraps explicit matrices; fixture-building aid.
    pub fn from_matrices(
        user_embeddings: Vec<f64>,
        item_embeddings: Vec<f64>,
        n_users: usize,
        n_items: usize,
        d: usize,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDim);
        }
        if user_embeddings.len() != n_users * d {
            return Err(Error::LengthMismatch("user embedding matrix"));
        }
        if item_embeddings.len() != n_items * d {
            return Err(Error::LengthMismatch("item embedding matrix"));
        }
        if let Some(&bad) =
            user_embeddings.iter().chain(&item_embeddings).find(|v| !v.is_finite())
        {
            return Err(Error::NonFiniteScore(bad));
        }
        Ok(ModelParams { d, n_users, n_items, user_embeddings, item_embeddings })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn user_vec(&self, u: usize) -> &[f64] {
        &self.user_embeddings[u * self.d..(u + 1) * self.d]
    }

    pub fn item_vec(&self, i: usize) -> &[f64] {
        &self.item_embeddings[i * self.d..(i + 1) * self.d]
    }

    pub fn user_vec_mut(&mut self, u: usize) -> &mut [f64] {
        &mut self.user_embeddings[u * self.d..(u + 1) * self.d]
    }

    pub fn item_vec_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.item_embeddings[i * self.d..(i + 1) * self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.user_embeddings.iter().chain(&self.item_embeddings).all(|v| v.is_finite())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The user-side vector the scorer dots against item embeddings: the user
/// embedding for the factor scorer, the history mean for the other.
pub fn representation(
    params: &ModelParams,
    scorer: ScorerKind,
    user: usize,
    history: &[usize],
) -> Result<Vec<f64>> {
    match scorer {
        ScorerKind::Factor => Ok(params.user_vec(user).to_vec()),
        ScorerKind::HistoryMean => {
            if history.is_empty() {
                return Err(Error::EmptyHistory);
            }
            let mut mean = vec![0.0; params.d()];
            for &j in history {
                for (m, v) in mean.iter_mut().zip(params.item_vec(j)) {
                    *m += v;
                }
            }
            let inv = 1.0 / history.len() as f64;
            for m in &mut mean {
                *m *= inv;
            }
            Ok(mean)
        }
    }
}

/// Scores one (user, history, item) triple.
pub fn score(
    params: &ModelParams,
    scorer: ScorerKind,
    user: usize,
    history: &[usize],
    item: usize,
) -> Result<f64> {
    Ok(dot(&representation(params, scorer, user, history)?, params.item_vec(item)))
}

/// Textual model dump: a `d,m,n,scorer` header line, its values, then the m
/// item embedding rows and the n user embedding rows, space-separated.
pub fn write_model_dump<W: Write>(
    params: &ModelParams,
    scorer: ScorerKind,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "d,m,n,scorer")?;
    writeln!(w, "{},{},{},{}", params.d(), params.n_items(), params.n_users(), scorer)?;
    // f64 Display round-trips exactly, so the dump loses nothing
    for i in 0..params.n_items() {
        let row: Vec<String> = params.item_vec(i).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    for u in 0..params.n_users() {
        let row: Vec<String> = params.user_vec(u).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}
