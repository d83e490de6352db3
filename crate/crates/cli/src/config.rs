//! Key-value config files and resolution of the effective run settings.
//!
//! Every setting is taken from the command line first, then from the file
//! named by `--config`, then from the built-in default.

use std::path::{Path, PathBuf};

use cdm_core::estimators::{Estimator, EstimatorKind};
use cdm_core::ingest::{GameSpec, Window};
use cdm_core::strategy::{parse_money, Accounting, ExtensionRule, StrategyConfig};
use serde::{Deserialize, Serialize};

use crate::args::{CommonArgs, Format, GameFlag, SimulateArgs};
use crate::error::{CliError, CliResult};

/// A TOML value that may be written as a number or a string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn as_text(&self) -> String {
        match self {
            Scalar::Int(v) => v.to_string(),
            Scalar::Float(v) => v.to_string(),
            Scalar::Text(s) => s.clone(),
        }
    }
}

/// Contents of a `--config` file. Keys mirror the long flag names with
/// dashes replaced by underscores.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub game: Option<GameFlag>,
    pub pool: Option<usize>,
    pub picks: Option<usize>,
    pub estimator: Option<String>,
    pub smoothing: Option<f64>,
    pub floor: Option<f64>,
    pub window: Option<Scalar>,
    pub warmup: Option<usize>,
    pub threshold: Option<usize>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub draws: Option<usize>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub stretch_cutoff: Option<u64>,
    pub gaps: Option<Vec<u64>>,
    pub gaps_file: Option<PathBuf>,
    pub ticket_price: Option<Scalar>,
    pub payout: Option<Scalar>,
    pub draws_per_day: Option<u64>,
    pub quarter_days: Option<u64>,
    pub schedule: Option<Vec<u64>>,
    pub extension: Option<String>,
    pub accounting: Option<String>,
    pub player_cap: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_input(path)?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.message())))
    }

    pub fn load_optional(path: Option<&Path>) -> CliResult<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}

/// Reads a file, reporting a missing or unreadable path as a usage error.
pub fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Splits a list given as `1,2,5` or `1 2 5`.
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> CliResult<Vec<T>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>().map_err(|_| {
                CliError::Usage(format!("{what}: '{s}' is not a non-negative integer"))
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameSettings {
    pub game: GameFlag,
    pub pool: usize,
    pub picks: usize,
}

impl GameSettings {
    pub fn spec(&self) -> CliResult<GameSpec> {
        Ok(match self.game {
            GameFlag::Set => GameSpec::set_draw(self.pool, self.picks)?,
            GameFlag::Pick => GameSpec::pick(self.picks)?,
        })
    }
}

/// Settings shared by every subcommand, after precedence is applied.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: FileConfig,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl Resolved {
    pub fn new(args: &CommonArgs) -> CliResult<Self> {
        let file = FileConfig::load_optional(args.config.as_deref())?;
        Ok(Self {
            format: args.format.or(file.format).unwrap_or(Format::Text),
            output: args.output.clone().or_else(|| file.output.clone()),
            file,
        })
    }

    pub fn game(&self, args: &CommonArgs) -> CliResult<GameSettings> {
        let game = args
            .game
            .or(self.file.game)
            .ok_or_else(|| CliError::Usage("--game is required (set or pick)".into()))?;
        let picks = args.picks.or(self.file.picks);
        let pool = args.pool.or(self.file.pool);
        let settings = match game {
            GameFlag::Set => GameSettings {
                game,
                pool: pool.ok_or_else(|| {
                    CliError::Usage("--pool is required for set-draw games".into())
                })?,
                picks: picks.ok_or_else(|| {
                    CliError::Usage("--picks is required for set-draw games".into())
                })?,
            },
            GameFlag::Pick => {
                if let Some(k) = pool.filter(|&k| k != 10) {
                    return Err(CliError::Usage(format!(
                        "digit games have a pool of 10, got --pool {k}"
                    )));
                }
                GameSettings {
                    game,
                    pool: 10,
                    picks: picks.unwrap_or(3),
                }
            }
        };
        settings.spec()?;
        Ok(settings)
    }

    pub fn estimator_kinds(
        &self,
        args: &CommonArgs,
        default: &str,
    ) -> CliResult<Vec<EstimatorKind>> {
        let text = args
            .estimator
            .clone()
            .or_else(|| self.file.estimator.clone())
            .unwrap_or_else(|| default.to_string());
        let kinds = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.parse::<EstimatorKind>().map_err(CliError::from))
            .collect::<CliResult<Vec<_>>>()?;
        if kinds.is_empty() {
            return Err(CliError::Usage(
                "--estimator must name at least one estimator".into(),
            ));
        }
        Ok(kinds)
    }

    pub fn estimator(&self, args: &CommonArgs, kind: EstimatorKind) -> CliResult<Estimator> {
        let estimator = Estimator::new(kind)
            .with_smoothing(args.smoothing.or(self.file.smoothing).unwrap_or(0.0))
            .with_positivity_floor(args.floor.or(self.file.floor).unwrap_or(0.0));
        estimator.validate()?;
        Ok(estimator)
    }

    pub fn window(&self, args: &CommonArgs) -> CliResult<Window> {
        match args
            .window
            .clone()
            .or_else(|| self.file.window.as_ref().map(Scalar::as_text))
        {
            Some(text) => Ok(text.parse()?),
            None => Ok(Window::All),
        }
    }

    pub fn strategy(&self, args: &SimulateArgs) -> CliResult<StrategyConfig> {
        let d = StrategyConfig::default();
        let f = &self.file;
        let money = |flag: &Option<String>, file: &Option<Scalar>, default| -> CliResult<i64> {
            match flag.clone().or_else(|| file.as_ref().map(Scalar::as_text)) {
                Some(text) => Ok(parse_money(&text)?),
                None => Ok(default),
            }
        };
        let schedule = match &args.schedule {
            Some(text) => parse_list(text, "--schedule")?,
            None => f.schedule.clone().unwrap_or(d.schedule),
        };
        let extension: ExtensionRule = match args.extension.as_ref().or(f.extension.as_ref()) {
            Some(text) => text.parse()?,
            None => d.extension,
        };
        let accounting: Accounting = match args.accounting.as_ref().or(f.accounting.as_ref()) {
            Some(text) => text.parse()?,
            None => d.accounting,
        };
        let config = StrategyConfig {
            ticket_price_cents: money(&args.ticket_price, &f.ticket_price, d.ticket_price_cents)?,
            payout_per_ticket_cents: money(&args.payout, &f.payout, d.payout_per_ticket_cents)?,
            draws_per_day: args
                .draws_per_day
                .or(f.draws_per_day)
                .unwrap_or(d.draws_per_day),
            quarter_days: args
                .quarter_days
                .or(f.quarter_days)
                .unwrap_or(d.quarter_days),
            player_cap: args.player_cap.or(f.player_cap).unwrap_or(d.player_cap),
            schedule,
            extension,
            accounting,
        };
        config.validate()?;
        Ok(config)
    }
}
