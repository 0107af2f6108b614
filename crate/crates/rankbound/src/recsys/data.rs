//! Interaction-log ingestion, cleaning, and the leave-last-out split.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sampling::{sample_indices, stream_rng};

/// Supported interaction-log formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// `user_id,item_id,timestamp` with that exact header row.
    Csv,
    /// `user::item::rating::timestamp`, no header; the rating is ignored and
    /// every row counts as an implicit positive.
    MovielensDat,
}

/// A cleaned interaction log: dense ids and chronological per-user sequences.
///
/// Users with fewer than 3 events are dropped at construction (the
/// leave-last-out split needs train/validation/test), and both user and item
/// ids are re-indexed densely in order of first appearance, so the mapping
/// back to the original tokens is deterministic for a given input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionDataset {
    user_tokens: Vec<String>,
    item_tokens: Vec<String>,
    sequences: Vec<Vec<usize>>,
    dropped_users: usize,
}

impl InteractionDataset {
    /// Builds a dataset from raw (user, item, timestamp) events.
    ///
    /// Events are grouped per user, sorted by timestamp (stable, so equal
    /// timestamps keep input order), then users with fewer than 3 events are
    /// dropped and ids are densified.
    pub fn from_events(events: Vec<(String, String, i64)>) -> Result<Self> {
        let mut user_order: Vec<String> = Vec::new();
        let mut user_index: HashMap<String, usize> = HashMap::new();
        let mut per_user: Vec<Vec<(i64, String)>> = Vec::new();
        for (user, item, ts) in events {
            let idx = *user_index.entry(user.clone()).or_insert_with(|| {
                user_order.push(user);
                per_user.push(Vec::new());
                per_user.len() - 1
            });
            per_user[idx].push((ts, item));
        }

        let mut user_tokens = Vec::new();
        let mut item_tokens: Vec<String> = Vec::new();
        let mut item_index: HashMap<String, usize> = HashMap::new();
        let mut sequences = Vec::new();
        let mut dropped_users = 0;
        for (token, mut events) in user_order.into_iter().zip(per_user) {
            if events.len() < 3 {
                dropped_users += 1;
                continue;
            }
            events.sort_by_key(|e| e.0);
            let seq = events
                .into_iter()
                .map(|(_, item)| {
                    *item_index.entry(item.clone()).or_insert_with(|| {
                        item_tokens.push(item);
                        item_tokens.len() - 1
                    })
                })
                .collect();
            user_tokens.push(token);
            sequences.push(seq);
        }
        if sequences.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(InteractionDataset { user_tokens, item_tokens, sequences, dropped_users })
    }

    pub fn n_users(&self) -> usize {
        self.sequences.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_tokens.len()
    }

    /// Item ids of user `u` in chronological order.
    pub fn sequence(&self, u: usize) -> &[usize] {
        &self.sequences[u]
    }

    pub fn user_token(&self, u: usize) -> &str {
        &self.user_tokens[u]
    }

    pub fn item_token(&self, i: usize) -> &str {
        &self.item_tokens[i]
    }

    /// Users removed for having fewer than 3 events.
    pub fn dropped_users(&self) -> usize {
        self.dropped_users
    }

    /// Writes `user_ids.csv` and `item_ids.csv` (dense id → original token)
    /// into `dir`, so model dumps can be traced back to the source log.
    pub fn write_id_maps(&self, dir: &Path) -> Result<()> {
        for (name, tokens) in
            [("user_ids.csv", &self.user_tokens), ("item_ids.csv", &self.item_tokens)]
        {
            let path = dir.join(name);
            let mut writer = csv::Writer::from_path(&path)
                .map_err(|source| Error::Csv { path: path.display().to_string(), source })?;
            writer
                .write_record(["dense_id", "original_id"])
                .and_then(|_| {
                    for (idx, token) in tokens.iter().enumerate() {
                        writer.write_record([idx.to_string().as_str(), token])?;
                    }
                    writer.flush().map_err(csv::Error::from)
                })
                .map_err(|source| Error::Csv { path: path.display().to_string(), source })?;
        }
        Ok(())
    }
}

/// Reads an interaction log in the given format.
///
/// Malformed rows fail with their line number; users with fewer than 3
/// events are dropped (counted on the returned dataset); an input with no
/// surviving user is an error.
pub fn load_interactions(path: &Path, format: InputFormat) -> Result<InteractionDataset> {
    let shown = path.display().to_string();
    let events = match format {
        InputFormat::Csv => read_csv_events(path, &shown)?,
        InputFormat::MovielensDat => read_movielens_events(path, &shown)?,
    };
    InteractionDataset::from_events(events)
}

fn read_csv_events(path: &Path, shown: &str) -> Result<Vec<(String, String, i64)>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|source| Error::Csv { path: shown.to_string(), source })?;
    let headers = reader
        .headers()
        .map_err(|source| Error::Csv { path: shown.to_string(), source })?;
    let expected = ["user_id", "item_id", "timestamp"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::MalformedRow {
            path: shown.to_string(),
            line: 1,
            message: format!("expected header user_id,item_id,timestamp, got {headers:?}"),
        });
    }
    let mut events = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| Error::Csv { path: shown.to_string(), source })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row_err = |message: String| Error::MalformedRow {
            path: shown.to_string(),
            line,
            message,
        };
        let user = record[0].trim();
        let item = record[1].trim();
        if user.is_empty() || item.is_empty() {
            return Err(row_err("empty user_id or item_id".to_string()));
        }
        let ts: i64 = record[2]
            .trim()
            .parse()
            .map_err(|_| row_err(format!("bad timestamp {:?}", &record[2])))?;
        events.push((user.to_string(), item.to_string(), ts));
    }
    Ok(events)
}

fn read_movielens_events(path: &Path, shown: &str) -> Result<Vec<(String, String, i64)>> {
    let file = File::open(path)
        .map_err(|source| Error::Csv { path: shown.to_string(), source: source.into() })?;
    let mut events = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row_err = |message: String| Error::MalformedRow {
            path: shown.to_string(),
            line: idx + 1,
            message,
        };
        let parts: Vec<&str> = trimmed.split("::").collect();
        if parts.len() != 4 {
            return Err(row_err(format!(
                "expected user::item::rating::timestamp, got {} fields",
                parts.len()
            )));
        }
        if parts[0].is_empty() || parts[1].is_empty() {
            return Err(row_err("empty user or item field".to_string()));
        }
        let ts: i64 = parts[3]
            .parse()
            .map_err(|_| row_err(format!("bad timestamp {:?}", parts[3])))?;
        events.push((parts[0].to_string(), parts[1].to_string(), ts));
    }
    Ok(events)
}

/// Per-user leave-last-out split plus the full interaction sets the trainer
/// and evaluator need for negative selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDataset {
    train: Vec<Vec<usize>>,
    validation: Vec<usize>,
    test: Vec<usize>,
    /// Sorted, deduplicated full interaction set per user.
    interacted: Vec<Vec<usize>>,
    user_tokens: Vec<String>,
    n_items: usize,
}

impl SplitDataset {
    /// Assembles a split directly from per-user parts; fixture-building aid.
    ///
    /// Train prefixes may be arbitrarily short here (they come pre-split),
    /// but ids must lie in the catalog and the per-user lists must line up.
    pub fn from_parts(
        train: Vec<Vec<usize>>,
        validation: Vec<usize>,
        test: Vec<usize>,
        n_items: usize,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if validation.len() != train.len() || test.len() != train.len() {
            return Err(Error::LengthMismatch("validation and test item lists"));
        }
        let mut interacted = Vec::with_capacity(train.len());
        for u in 0..train.len() {
            let mut all: Vec<usize> = train[u].clone();
            all.push(validation[u]);
            all.push(test[u]);
            if let Some(&item) = all.iter().find(|&&i| i >= n_items) {
                return Err(Error::ItemOutOfRange { item, n_items });
            }
            all.sort_unstable();
            all.dedup();
            interacted.push(all);
        }
        let user_tokens = (0..train.len()).map(|u| format!("u{u}")).collect();
        Ok(SplitDataset { train, validation, test, interacted, user_tokens, n_items })
    }

    pub fn n_users(&self) -> usize {
        self.train.len()
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Chronological train prefix of user `u`.
    pub fn train(&self, u: usize) -> &[usize] {
        &self.train[u]
    }

    pub fn validation(&self, u: usize) -> usize {
        self.validation[u]
    }

    pub fn test(&self, u: usize) -> usize {
        self.test[u]
    }

    /// Every item user `u` ever interacted with (train + validation + test),
    /// sorted and deduplicated. Everything outside this set is a negative.
    pub fn interacted(&self, u: usize) -> &[usize] {
        &self.interacted[u]
    }

    pub fn user_token(&self, u: usize) -> &str {
        &self.user_tokens[u]
    }

    /// Size of user `u`'s negative pool.
    pub fn available_negatives(&self, u: usize) -> usize {
        self.n_items - self.interacted[u].len()
    }
}

/// Splits each user's sequence into train prefix, validation item
/// (second-to-last) and test item (last).
pub fn split_leave_last(dataset: &InteractionDataset) -> Result<SplitDataset> {
    let mut train = Vec::with_capacity(dataset.n_users());
    let mut validation = Vec::with_capacity(dataset.n_users());
    let mut test = Vec::with_capacity(dataset.n_users());
    let mut interacted = Vec::with_capacity(dataset.n_users());
    let mut user_tokens = Vec::with_capacity(dataset.n_users());
    for u in 0..dataset.n_users() {
        let seq = dataset.sequence(u);
        if seq.len() < 3 {
            return Err(Error::UserTooShort {
                user: dataset.user_token(u).to_string(),
                events: seq.len(),
            });
        }
        train.push(seq[..seq.len() - 2].to_vec());
        validation.push(seq[seq.len() - 2]);
        test.push(seq[seq.len() - 1]);
        let mut all = seq.to_vec();
        all.sort_unstable();
        all.dedup();
        interacted.push(all);
        user_tokens.push(dataset.user_token(u).to_string());
    }
    Ok(SplitDataset {
        train,
        validation,
        test,
        interacted,
        user_tokens,
        n_items: dataset.n_items(),
    })
}

/// Synthetic block-preference log: users in block b interact only with the
/// items of block b, so any competent scorer can separate blocks.
///
/// User u belongs to block u mod `n_blocks`; each user draws
/// `events_per_user` distinct items uniformly from its block (seeded per
/// user, deterministic). Items some block never drew are densified away.
pub fn synthetic_blocks(
    n_users: usize,
    n_items: usize,
    n_blocks: usize,
    events_per_user: usize,
    seed: u64,
) -> Result<InteractionDataset> {
    if n_blocks == 0 || n_blocks > n_items {
        return Err(Error::InvalidHyperparameter("n_blocks must be in 1..=n_items"));
    }
    if events_per_user < 3 {
        return Err(Error::InvalidHyperparameter("events_per_user must be at least 3"));
    }
    let base = n_items / n_blocks;
    if events_per_user > base {
        return Err(Error::SampleTooLarge { k: events_per_user, population: base });
    }
    let mut events = Vec::with_capacity(n_users * events_per_user);
    for u in 0..n_users {
        let block = u % n_blocks;
        let start = block * base;
        let len = if block == n_blocks - 1 { n_items - start } else { base };
        let mut rng = stream_rng(seed, u as u64);
        for (t, offset) in sample_indices(len, events_per_user, &mut rng).into_iter().enumerate() {
            events.push((format!("u{u}"), format!("i{}", start + offset), t as i64));
        }
    }
    InteractionDataset::from_events(events)
}
