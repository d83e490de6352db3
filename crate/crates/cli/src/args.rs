use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cdm",
    version,
    about = "Compound-Dirichlet-Multinomial lottery prediction, backtesting and staking simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded uniform-random draw history as CSV.
    Synth(CommonArgs),
    /// Predict the draw following the end of a history.
    Predict(CommonArgs),
    /// Walk a history, score every prediction and report hit gaps.
    Backtest(BacktestArgs),
    /// Simulate the quarterly escalation staking plan over hit gaps.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GameFlag {
    Set,
    Pick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Key-value (TOML) file supplying defaults for any flag.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub game: Option<GameFlag>,
    /// Pool size K for set-draw games.
    #[arg(long, value_name = "K")]
    pub pool: Option<usize>,
    /// Numbers per draw, or digit positions for pick games.
    #[arg(long, value_name = "M")]
    pub picks: Option<usize>,
    /// Estimator, or a comma-separated list for predict: md, mm, mle.
    #[arg(long, value_name = "LIST")]
    pub estimator: Option<String>,
    /// Additive smoothing applied before the MLE.
    #[arg(long, value_name = "EPS")]
    pub smoothing: Option<f64>,
    /// Lifts exact-zero estimates to this value.
    #[arg(long, value_name = "FLOOR")]
    pub floor: Option<f64>,
    /// Number of trailing draws used for fitting, or "all".
    #[arg(long, value_name = "N|all")]
    pub window: Option<String>,
    #[arg(long, value_name = "N")]
    pub warmup: Option<usize>,
    /// Minimum match count recorded as a hit.
    #[arg(long, value_name = "T")]
    pub threshold: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Number of synthetic draws to generate.
    #[arg(long, value_name = "N")]
    pub draws: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BacktestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Precomputed hit indices (whitespace or comma separated) to summarise
    /// instead of running a backtest.
    #[arg(long, value_name = "PATH")]
    pub hits: Option<PathBuf>,
    /// Gap length separating short from long stretches.
    #[arg(long, value_name = "DRAWS")]
    pub stretch_cutoff: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated draws between hits.
    #[arg(long, value_name = "LIST", conflicts_with = "gaps_file")]
    pub gaps: Option<String>,
    /// Backtest JSON document or a plain list of gaps.
    #[arg(long, value_name = "PATH")]
    pub gaps_file: Option<PathBuf>,
    /// Simulate a single stream with no win for this many days.
    #[arg(long, value_name = "DAYS", conflicts_with_all = ["gaps", "gaps_file"])]
    pub no_win_horizon: Option<u64>,
    /// Dollars per ticket.
    #[arg(long, value_name = "DOLLARS")]
    pub ticket_price: Option<String>,
    /// Dollars paid per winning ticket.
    #[arg(long, value_name = "DOLLARS")]
    pub payout: Option<String>,
    #[arg(long, value_name = "N")]
    pub draws_per_day: Option<u64>,
    #[arg(long, value_name = "DAYS")]
    pub quarter_days: Option<u64>,
    /// Comma-separated player counts for the first quarters.
    #[arg(long, value_name = "LIST")]
    pub schedule: Option<String>,
    /// min-recover or ratio:R
    #[arg(long, value_name = "RULE")]
    pub extension: Option<String>,
    /// paper (full quarters) or exact (elapsed days)
    #[arg(long, value_name = "MODE")]
    pub accounting: Option<String>,
    #[arg(long, value_name = "N")]
    pub player_cap: Option<u64>,
}
