//! Command-line experiments over the rankbound library.
//!
//! Four subcommands: `verify` (fuzzed inequality checks plus Monte Carlo
//! bound verification), `surface` (bound-probability grids as CSV), `train`
//! (one recommender training run), and `sweep` (a concurrent cross product
//! of training runs merged into one long-format CSV).
//!
//! Every run resolves its configuration from built-in defaults, then an
//! optional TOML config file (unknown keys rejected), then command-line
//! flags, and persists the resolved result as `resolved-config.toml` next to
//! its outputs. Exit codes: 0 success, 1 runtime or I/O error, 2 usage
//! error, 3 verification counterexample. The only environment variable
//! honored is `RANKBOUND_WORKERS` (thread count for parallel checks).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use rankbound::bounds::{
    bound_surface, fuzz_full_chain, fuzz_sampled_bounds, monte_carlo_bound_check,
    population_with_counts, write_monte_carlo_csv, write_surface_csv, BoundReport, FuzzFailure,
};
use rankbound::losses::LossKind;
use rankbound::metrics::MetricKind;
use rankbound::recsys::{
    load_interactions, split_leave_last, train, write_model_dump, write_trace_csv, InputFormat,
    OptimizerKind, ScorerKind, TrainConfig, TrainOutcome,
};
use rankbound::sampling::SamplerConfig;

#[derive(Parser)]
#[command(name = "rankbound", version, about = "Ranking-loss bound verification and training experiments")]
struct Cli {
    /// TOML config file; command-line flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fuzz the loss/metric inequality chains and Monte Carlo-check the
    /// sampled-loss bound probabilities
    Verify(VerifyFlags),
    /// Write a grid of bound probabilities over (K, rank) as CSV
    Surface(SurfaceFlags),
    /// Train an embedding recommender with a sampled loss
    Train(TrainFlags),
    /// Run a loss × K × seed cross product of training runs concurrently
    Sweep(SweepFlags),
}

#[derive(Args)]
struct VerifyFlags {
    /// Fuzz cases for the full-score inequality chain
    #[arg(long)]
    chain_cases: Option<usize>,
    /// Fuzz cases for the sampled-score lower bounds
    #[arg(long)]
    sampled_cases: Option<usize>,
    /// Monte Carlo trials per scenario
    #[arg(long)]
    trials: Option<usize>,
    /// Catalog size N of the Monte Carlo scenario
    #[arg(long)]
    population: Option<usize>,
    /// Negatives K sampled per trial
    #[arg(long)]
    negatives: Option<usize>,
    /// True rank r+ of the scenario's positive item
    #[arg(long)]
    rank: Option<usize>,
    /// Scenario's |Gamma_0| (negatives scoring >= 0); must be >= rank - 1
    #[arg(long)]
    gamma0: Option<usize>,
}

#[derive(Args)]
struct SurfaceFlags {
    /// Catalog size N
    #[arg(long)]
    population: Option<usize>,
    /// Sample sizes, e.g. "1,2,5,20,50,100"
    #[arg(long, value_name = "LIST")]
    k_list: Option<String>,
    /// Ranks, e.g. "1..50" or "1,2,5"
    #[arg(long, value_name = "LIST")]
    rank_list: Option<String>,
    /// ndcg or mrr
    #[arg(long)]
    metric: Option<String>,
    /// Comma-separated subset of bce,bpr,cce
    #[arg(long, value_name = "LIST")]
    losses: Option<String>,
}

#[derive(Args)]
struct TrainFlags {
    /// Interaction log to train on
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// csv or movielens-dat
    #[arg(long)]
    format: Option<String>,
    /// bce, bpr or cce
    #[arg(long)]
    loss: Option<String>,
    /// Negatives K sampled per positive
    #[arg(long)]
    negatives: Option<usize>,
    /// factor or history-mean
    #[arg(long)]
    scorer: Option<String>,
    /// Embedding dimension
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// sgd or adam
    #[arg(long)]
    optimizer: Option<String>,
    /// Evaluation cutoff k for NDCG@k / MRR@k
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Args)]
struct SweepFlags {
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
    /// csv or movielens-dat
    #[arg(long)]
    format: Option<String>,
    /// Comma-separated subset of bce,bpr,cce
    #[arg(long, value_name = "LIST")]
    loss_list: Option<String>,
    /// Sample sizes, e.g. "1,5,20"
    #[arg(long, value_name = "LIST")]
    k_list: Option<String>,
    /// Comma-separated seeds, one training run per (loss, K, seed)
    #[arg(long, value_name = "LIST")]
    seeds: Option<String>,
    #[arg(long)]
    scorer: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    cutoff: Option<usize>,
}

// Resolved per-command configurations. Serde double duty: Deserialize reads
// the config file (strictly: unknown keys are rejected), Serialize writes
// the resolved copy.

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct VerifyConfig {
    seed: u64,
    out: PathBuf,
    chain_cases: usize,
    sampled_cases: usize,
    trials: usize,
    population: usize,
    negatives: usize,
    rank: usize,
    gamma0: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            out: PathBuf::from("rankbound-out"),
            chain_cases: 100_000,
            sampled_cases: 100_000,
            trials: 10_000,
            population: 1_000,
            negatives: 10,
            rank: 5,
            gamma0: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SurfaceConfig {
    seed: u64,
    out: PathBuf,
    population: usize,
    k_list: Vec<usize>,
    rank_list: Vec<usize>,
    metric: String,
    losses: Vec<String>,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            seed: 0,
            out: PathBuf::from("rankbound-out"),
            population: 1_000,
            k_list: vec![1, 2, 5, 20, 50, 100],
            rank_list: (1..=50).collect(),
            metric: "ndcg".to_string(),
            losses: vec!["bce".to_string(), "bpr".to_string(), "cce".to_string()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct TrainCliConfig {
    seed: u64,
    out: PathBuf,
    dataset: PathBuf,
    format: String,
    loss: String,
    negatives: usize,
    scorer: String,
    dim: usize,
    batch_size: usize,
    learning_rate: f64,
    epochs: usize,
    optimizer: String,
    cutoff: usize,
}

impl Default for TrainCliConfig {
    fn default() -> Self {
        TrainCliConfig {
            seed: 0,
            out: PathBuf::from("rankbound-out"),
            dataset: PathBuf::new(),
            format: "csv".to_string(),
            loss: "bpr".to_string(),
            negatives: 5,
            scorer: "factor".to_string(),
            dim: 64,
            batch_size: 128,
            learning_rate: 0.001,
            epochs: 100,
            optimizer: "adam".to_string(),
            cutoff: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SweepConfig {
    seed: u64,
    out: PathBuf,
    dataset: PathBuf,
    format: String,
    loss_list: Vec<String>,
    k_list: Vec<usize>,
    seeds: Vec<u64>,
    scorer: String,
    dim: usize,
    batch_size: usize,
    learning_rate: f64,
    epochs: usize,
    optimizer: String,
    cutoff: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let t = TrainCliConfig::default();
        SweepConfig {
            seed: 0,
            out: t.out,
            dataset: PathBuf::new(),
            format: t.format,
            loss_list: vec!["bce".to_string(), "bpr".to_string(), "cce".to_string()],
            k_list: vec![1, 5, 20],
            seeds: vec![0],
            scorer: t.scorer,
            dim: t.dim,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            optimizer: t.optimizer,
            cutoff: t.cutoff,
        }
    }
}

/// A usage problem: reported on stderr, exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_workers() {
        eprintln!("usage error: {msg}");
        return ExitCode::from(2);
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// RANKBOUND_WORKERS caps the thread pool; unset means rayon's default.
fn init_workers() -> std::result::Result<(), String> {
    match std::env::var("RANKBOUND_WORKERS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| format!("RANKBOUND_WORKERS must be a positive integer, got {raw:?}"))?;
            if n == 0 {
                return Err("RANKBOUND_WORKERS must be a positive integer".to_string());
            }
            // a failure here means a pool already exists, which is fine
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    let common = (cli.config, cli.seed, cli.out);
    let outcome = match cli.command {
        Command::Verify(flags) => resolve(&common, flags, "verify"),
        Command::Surface(flags) => resolve(&common, flags, "surface"),
        Command::Train(flags) => resolve(&common, flags, "train"),
        Command::Sweep(flags) => resolve(&common, flags, "sweep"),
    };
    match outcome {
        Ok(run) => run,
        Err(usage_err) => {
            eprintln!("usage error: {usage_err}");
            Ok(ExitCode::from(2))
        }
    }
}

/// Loads the config file (if any), applies flag overrides, validates, then
/// hands the resolved config to the command body.
fn resolve<F: ApplyFlags>(
    common: &(Option<PathBuf>, Option<u64>, Option<PathBuf>),
    flags: F,
    command: &'static str,
) -> std::result::Result<Result<ExitCode>, UsageError>
where
    F::Config: Default + DeserializeOwned + Serialize,
{
    let (config_path, seed, out) = common;
    let mut config: F::Config = match config_path {
        None => F::Config::default(),
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(text) => text,
                Err(err) => {
                    return Ok(Err(anyhow::anyhow!("{}: {err}", path.display())));
                }
            };
            match toml::from_str(&text) {
                Ok(config) => config,
                Err(err) => return usage(format!("{}: {err}", path.display())),
            }
        }
    };
    flags.apply(&mut config, *seed, out.clone())?;
    Ok(F::run(config, command))
}

/// Per-command glue: how flags override the config and what the command does.
trait ApplyFlags {
    type Config;
    fn apply(
        self,
        config: &mut Self::Config,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> std::result::Result<(), UsageError>;
    fn run(config: Self::Config, command: &'static str) -> Result<ExitCode>;
}

fn prepare_out_dir<C: Serialize>(config: &C, command: &str, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
    #[derive(Serialize)]
    struct Resolved<'a, C: Serialize> {
        command: &'a str,
        #[serde(flatten)]
        config: &'a C,
    }
    let text = toml::to_string_pretty(&Resolved { command, config })
        .context("serializing resolved config")?;
    let path = out.join("resolved-config.toml");
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

// list and name parsing, shared by flags and config values

/// Parses "1,2,5" and "1..50" (inclusive) and mixtures of both.
fn parse_usize_list(raw: &str) -> std::result::Result<Vec<usize>, UsageError> {
    let mut out = Vec::new();
    for token in raw.split(',') {
        let token = token.trim();
        if let Some((a, b)) = token.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| UsageError(format!("bad range start {a:?}")))?;
            let b: usize = b.trim().parse().map_err(|_| UsageError(format!("bad range end {b:?}")))?;
            if a > b {
                return usage(format!("empty range {token:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(token.parse().map_err(|_| UsageError(format!("bad number {token:?}")))?);
        }
    }
    if out.is_empty() {
        return usage("empty list");
    }
    Ok(out)
}

fn parse_u64_list(raw: &str) -> std::result::Result<Vec<u64>, UsageError> {
    raw.split(',')
        .map(|t| t.trim().parse().map_err(|_| UsageError(format!("bad seed {t:?}"))))
        .collect()
}

fn parse_name_list(raw: &str) -> Vec<String> {
    raw.split(',').map(|t| t.trim().to_string()).collect()
}

fn loss_from_name(name: &str) -> std::result::Result<LossKind, UsageError> {
    LossKind::ALL
        .into_iter()
        .find(|l| l.name() == name)
        .ok_or_else(|| UsageError(format!("unknown loss {name:?}, expected bce, bpr or cce")))
}

fn metric_from_name(name: &str) -> std::result::Result<MetricKind, UsageError> {
    match name {
        "ndcg" => Ok(MetricKind::Ndcg),
        "mrr" => Ok(MetricKind::Mrr),
        other => usage(format!("unknown metric {other:?}, expected ndcg or mrr")),
    }
}

fn scorer_from_name(name: &str) -> std::result::Result<ScorerKind, UsageError> {
    ScorerKind::ALL
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| UsageError(format!("unknown scorer {name:?}, expected factor or history-mean")))
}

fn optimizer_from_name(name: &str) -> std::result::Result<OptimizerKind, UsageError> {
    match name {
        "sgd" => Ok(OptimizerKind::Sgd),
        "adam" => Ok(OptimizerKind::default()),
        other => usage(format!("unknown optimizer {other:?}, expected sgd or adam")),
    }
}

fn format_from_name(name: &str) -> std::result::Result<InputFormat, UsageError> {
    match name {
        "csv" => Ok(InputFormat::Csv),
        "movielens-dat" => Ok(InputFormat::MovielensDat),
        other => usage(format!("unknown format {other:?}, expected csv or movielens-dat")),
    }
}

// verify

impl ApplyFlags for VerifyFlags {
    type Config = VerifyConfig;

    fn apply(
        self,
        c: &mut VerifyConfig,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> std::result::Result<(), UsageError> {
        if let Some(v) = seed {
            c.seed = v;
        }
        if let Some(v) = out {
            c.out = v;
        }
        if let Some(v) = self.chain_cases {
            c.chain_cases = v;
        }
        if let Some(v) = self.sampled_cases {
            c.sampled_cases = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.population {
            c.population = v;
        }
        if let Some(v) = self.negatives {
            c.negatives = v;
        }
        if let Some(v) = self.rank {
            c.rank = v;
        }
        if let Some(v) = self.gamma0 {
            c.gamma0 = v;
        }
        if c.trials == 0 {
            return usage("--trials must be positive");
        }
        if c.chain_cases == 0 || c.sampled_cases == 0 {
            return usage("fuzz case counts must be positive");
        }
        if c.rank == 0 {
            return usage("--rank must be at least 1");
        }
        if c.rank - 1 > c.gamma0 || c.gamma0 > c.population {
            return usage(format!(
                "--gamma0 must lie in [rank - 1, population] = [{}, {}]",
                c.rank - 1,
                c.population
            ));
        }
        if c.negatives == 0 || c.negatives > c.population {
            return usage(format!("--negatives must lie in [1, {}]", c.population));
        }
        Ok(())
    }

    fn run(config: VerifyConfig, command: &'static str) -> Result<ExitCode> {
        prepare_out_dir(&config, command, &config.out)?;

        let print_failure = |name: &str, f: &FuzzFailure| {
            eprintln!("counterexample in {name} (generator {}, case {}):", f.generator, f.case_index);
            eprintln!("  positive score: {}", f.scores.positive());
            eprintln!("  negatives ({} of them): {:?}", f.scores.negatives().len(), f.scores.negatives());
            eprintln!("  {}", f.detail);
        };

        if let Some(f) = fuzz_full_chain(config.chain_cases, config.seed) {
            print_failure("full-score inequality chain", &f);
            return Ok(ExitCode::from(3));
        }
        println!(
            "chain check: {} fuzzed full-score sets satisfied -log ndcg <= cce <= bpr (<= bce)",
            config.chain_cases
        );

        if let Some(f) = fuzz_sampled_bounds(config.sampled_cases, config.seed.wrapping_add(1)) {
            print_failure("sampled-score lower bounds", &f);
            return Ok(ExitCode::from(3));
        }
        println!(
            "sampled-bound check: {} fuzzed sampled sets satisfied the gamma-count lower bounds",
            config.sampled_cases
        );

        let scores = population_with_counts(config.population, config.rank, config.gamma0)?;
        let sampler = SamplerConfig { k: config.negatives, seed: config.seed };
        let mut reports: Vec<BoundReport> = Vec::new();
        for metric in [MetricKind::Ndcg, MetricKind::Mrr] {
            reports.push(monte_carlo_bound_check(&scores, &sampler, metric, config.trials)?);
        }
        let csv_path = config.out.join("monte-carlo.csv");
        let file = fs::File::create(&csv_path)
            .with_context(|| format!("creating {}", csv_path.display()))?;
        write_monte_carlo_csv(&reports, file)?;

        for report in &reports {
            for row in &report.rows {
                println!(
                    "monte carlo {}/{}: frequency {:.4} vs bound {:.4} over {} trials ({})",
                    row.loss,
                    report.metric,
                    row.frequency,
                    row.theoretical_bound,
                    report.trials,
                    if row.holds { "ok" } else { "VIOLATED" }
                );
            }
        }
        if let Some((report, row)) = reports
            .iter()
            .flat_map(|rep| rep.rows.iter().map(move |row| (rep, row)))
            .find(|(rep, row)| !row.holds || row.deterministic_passes != rep.trials)
        {
            eprintln!(
                "counterexample: loss {} metric {} K {} frequency {} below bound {} (std err {})",
                row.loss, report.metric, report.k, row.frequency, row.theoretical_bound, row.std_err
            );
            return Ok(ExitCode::from(3));
        }
        println!("all checks passed; report written to {}", csv_path.display());
        Ok(ExitCode::SUCCESS)
    }
}

// surface

impl ApplyFlags for SurfaceFlags {
    type Config = SurfaceConfig;

    fn apply(
        self,
        c: &mut SurfaceConfig,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> std::result::Result<(), UsageError> {
        if let Some(v) = seed {
            c.seed = v;
        }
        if let Some(v) = out {
            c.out = v;
        }
        if let Some(v) = self.population {
            c.population = v;
        }
        if let Some(v) = &self.k_list {
            c.k_list = parse_usize_list(v)?;
        }
        if let Some(v) = &self.rank_list {
            c.rank_list = parse_usize_list(v)?;
        }
        if let Some(v) = self.metric {
            c.metric = v;
        }
        if let Some(v) = &self.losses {
            c.losses = parse_name_list(v);
        }
        metric_from_name(&c.metric)?;
        for name in &c.losses {
            loss_from_name(name)?;
        }
        if c.k_list.is_empty() || c.rank_list.is_empty() || c.losses.is_empty() {
            return usage("k-list, rank-list and losses must be non-empty");
        }
        if let Some(&k) = c.k_list.iter().find(|&&k| k == 0 || k > c.population) {
            return usage(format!("K {k} outside [1, population = {}]", c.population));
        }
        if let Some(&r) = c.rank_list.iter().find(|&&r| r == 0 || r - 1 > c.population) {
            return usage(format!("rank {r} outside [1, population + 1]"));
        }
        Ok(())
    }

    fn run(config: SurfaceConfig, command: &'static str) -> Result<ExitCode> {
        prepare_out_dir(&config, command, &config.out)?;
        let metric = metric_from_name(&config.metric).expect("validated");
        let losses: Vec<LossKind> = config
            .losses
            .iter()
            .map(|n| loss_from_name(n).expect("validated"))
            .collect();
        let cells = bound_surface(config.population, &config.k_list, &config.rank_list, metric, &losses)?;
        let path = config.out.join("surface.csv");
        let file =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_surface_csv(&cells, file)?;
        println!("wrote {} surface cells to {}", cells.len(), path.display());
        Ok(ExitCode::SUCCESS)
    }
}

// train

#[allow(clippy::too_many_arguments)]
fn build_train_config(
    seed: u64,
    loss: &str,
    negatives: usize,
    scorer: &str,
    dim: usize,
    batch_size: usize,
    learning_rate: f64,
    epochs: usize,
    optimizer: &str,
    cutoff: usize,
) -> std::result::Result<TrainConfig, UsageError> {
    let config = TrainConfig {
        loss: loss_from_name(loss)?,
        negatives,
        scorer: scorer_from_name(scorer)?,
        dim,
        batch_size,
        learning_rate,
        epochs,
        optimizer: optimizer_from_name(optimizer)?,
        seed,
        cutoff,
    };
    config.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(config)
}

fn summarize(outcome: &TrainOutcome, label: &str) {
    let test_rows: Vec<_> = outcome
        .trace
        .iter()
        .filter(|r| r.split == rankbound::recsys::EvalSplit::Test)
        .collect();
    println!(
        "{label}: best validation ndcg {:.4} at epoch {}; test {}",
        outcome.best_validation_ndcg,
        outcome.best_epoch,
        test_rows
            .iter()
            .map(|r| format!("{} {:.4}", r.metric, r.value))
            .collect::<Vec<_>>()
            .join(", ")
    );
}

impl ApplyFlags for TrainFlags {
    type Config = TrainCliConfig;

    fn apply(
        self,
        c: &mut TrainCliConfig,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> std::result::Result<(), UsageError> {
        if let Some(v) = seed {
            c.seed = v;
        }
        if let Some(v) = out {
            c.out = v;
        }
        if let Some(v) = self.dataset {
            c.dataset = v;
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        if let Some(v) = self.loss {
            c.loss = v;
        }
        if let Some(v) = self.negatives {
            c.negatives = v;
        }
        if let Some(v) = self.scorer {
            c.scorer = v;
        }
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.optimizer {
            c.optimizer = v;
        }
        if let Some(v) = self.cutoff {
            c.cutoff = v;
        }
        if c.dataset.as_os_str().is_empty() {
            return usage("--dataset is required");
        }
        format_from_name(&c.format)?;
        build_train_config(
            c.seed,
            &c.loss,
            c.negatives,
            &c.scorer,
            c.dim,
            c.batch_size,
            c.learning_rate,
            c.epochs,
            &c.optimizer,
            c.cutoff,
        )?;
        Ok(())
    }

    fn run(config: TrainCliConfig, command: &'static str) -> Result<ExitCode> {
        prepare_out_dir(&config, command, &config.out)?;
        let format = format_from_name(&config.format).expect("validated");
        let train_config = build_train_config(
            config.seed,
            &config.loss,
            config.negatives,
            &config.scorer,
            config.dim,
            config.batch_size,
            config.learning_rate,
            config.epochs,
            &config.optimizer,
            config.cutoff,
        )
        .expect("validated");

        let dataset = load_interactions(&config.dataset, format)?;
        if dataset.dropped_users() > 0 {
            eprintln!(
                "warning: dropped {} user(s) with fewer than 3 events",
                dataset.dropped_users()
            );
        }
        dataset.write_id_maps(&config.out)?;
        let split = split_leave_last(&dataset)?;
        println!(
            "dataset: {} users, {} items after filtering",
            split.n_users(),
            dataset.n_items()
        );

        let outcome = train(&split, &train_config)?;

        let trace_path = config.out.join("trace.csv");
        let file = fs::File::create(&trace_path)
            .with_context(|| format!("creating {}", trace_path.display()))?;
        write_trace_csv(&outcome.trace, file)?;
        let model_path = config.out.join("model.txt");
        let file = fs::File::create(&model_path)
            .with_context(|| format!("creating {}", model_path.display()))?;
        write_model_dump(&outcome.params, train_config.scorer, file)?;
        summarize(&outcome, "train");
        println!("trace written to {}; model to {}", trace_path.display(), model_path.display());
        Ok(ExitCode::SUCCESS)
    }
}

// sweep

impl ApplyFlags for SweepFlags {
    type Config = SweepConfig;

    fn apply(
        self,
        c: &mut SweepConfig,
        seed: Option<u64>,
        out: Option<PathBuf>,
    ) -> std::result::Result<(), UsageError> {
        if let Some(v) = seed {
            c.seed = v;
            c.seeds = vec![v];
        }
        if let Some(v) = out {
            c.out = v;
        }
        if let Some(v) = self.dataset {
            c.dataset = v;
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        if let Some(v) = &self.loss_list {
            c.loss_list = parse_name_list(v);
        }
        if let Some(v) = &self.k_list {
            c.k_list = parse_usize_list(v)?;
        }
        if let Some(v) = &self.seeds {
            c.seeds = parse_u64_list(v)?;
        }
        if let Some(v) = self.scorer {
            c.scorer = v;
        }
        if let Some(v) = self.dim {
            c.dim = v;
        }
        if let Some(v) = self.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = self.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = self.epochs {
            c.epochs = v;
        }
        if let Some(v) = self.optimizer {
            c.optimizer = v;
        }
        if let Some(v) = self.cutoff {
            c.cutoff = v;
        }
        if c.dataset.as_os_str().is_empty() {
            return usage("--dataset is required");
        }
        if c.loss_list.is_empty() || c.k_list.is_empty() || c.seeds.is_empty() {
            return usage("loss-list, k-list and seeds must be non-empty");
        }
        format_from_name(&c.format)?;
        // fail on unknown names before any run
        for (loss, &k) in c.loss_list.iter().flat_map(|l| c.k_list.iter().map(move |k| (l, k))) {
            build_train_config(
                c.seeds[0],
                loss,
                k,
                &c.scorer,
                c.dim,
                c.batch_size,
                c.learning_rate,
                c.epochs,
                &c.optimizer,
                c.cutoff,
            )?;
        }
        Ok(())
    }

    fn run(config: SweepConfig, command: &'static str) -> Result<ExitCode> {
        prepare_out_dir(&config, command, &config.out)?;
        let format = format_from_name(&config.format).expect("validated");
        let dataset = load_interactions(&config.dataset, format)?;
        let split = split_leave_last(&dataset)?;

        let mut cells: Vec<(LossKind, usize, u64)> = Vec::new();
        for name in &config.loss_list {
            let loss = loss_from_name(name).expect("validated");
            for &k in &config.k_list {
                for &seed in &config.seeds {
                    cells.push((loss, k, seed));
                }
            }
        }

        println!("sweep: {} cells on {} users", cells.len(), split.n_users());
        let results: Vec<(String, usize, u64, rankbound::Result<TrainOutcome>)> = cells
            .par_iter()
            .map(|&(loss, k, seed)| {
                let train_config = TrainConfig {
                    loss,
                    negatives: k,
                    seed,
                    ..build_train_config(
                        seed,
                        loss.name(),
                        k,
                        &config.scorer,
                        config.dim,
                        config.batch_size,
                        config.learning_rate,
                        config.epochs,
                        &config.optimizer,
                        config.cutoff,
                    )
                    .expect("validated")
                };
                (loss.name().to_string(), k, seed, train(&split, &train_config))
            })
            .collect();

        let path = config.out.join("sweep.csv");
        let mut file =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        use std::io::Write;
        writeln!(file, "loss,K,seed,epoch,split,metric,cutoff,value")?;
        let mut failures = 0;
        for (loss, k, seed, result) in &results {
            match result {
                Ok(outcome) => {
                    for r in &outcome.trace {
                        writeln!(
                            file,
                            "{loss},{k},{seed},{},{},{},{},{}",
                            r.epoch, r.split, r.metric, r.cutoff, r.value
                        )?;
                    }
                    summarize(outcome, &format!("cell loss={loss} K={k} seed={seed}"));
                }
                Err(err) => {
                    failures += 1;
                    eprintln!("cell loss={loss} K={k} seed={seed} failed: {err}");
                }
            }
        }
        println!("aggregate written to {}", path.display());
        if failures > 0 {
            eprintln!("{failures} of {} cells failed", results.len());
            return Ok(ExitCode::from(1));
        }
        Ok(ExitCode::SUCCESS)
    }
}
