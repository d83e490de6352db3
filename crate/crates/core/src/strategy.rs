//! The "3-strategy" staking plan for a positional digit game.
//!
//! Play runs in quarters of `quarter_days` days. Each player buys one ticket
//! per draw. After every losing quarter the number of players grows, first
//! along a fixed schedule (default `[1, 2, 5, 12]`) and then by an
//! extension rule, so that a win in any quarter recovers everything spent
//! so far. All money is held in integer cents.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Cents = i64;

pub const DEFAULT_PLAYER_CAP: u64 = 1_000_000;

/// Most consecutive combinations one person may play on a single draw.
pub const MAX_COMBINATIONS_PER_PLAYER: u64 = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionRule {
    /// Smallest player count whose win recovers all losses and at least
    /// matches the previous quarter's would-be profit.
    MinRecover,
    /// `ceil(r × previous players)`.
    FixedRatio(f64),
}

impl fmt::Display for ExtensionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionRule::MinRecover => f.write_str("min-recover"),
            ExtensionRule::FixedRatio(r) => write!(f, "ratio:{r}"),
        }
    }
}

impl FromStr for ExtensionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("min-recover") {
            return Ok(ExtensionRule::MinRecover);
        }
        if let Some(r) = s.strip_prefix("ratio:") {
            return r
                .parse::<f64>()
                .map(ExtensionRule::FixedRatio)
                .map_err(|_| Error::invalid(format!("bad ratio '{r}'")));
        }
        Err(Error::invalid(format!(
            "unknown extension rule '{s}' (expected min-recover or ratio:R)"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accounting {
    /// Every quarter that is entered is charged in full, including the
    /// winning one.
    PaperQuarter,
    /// The winning quarter is charged only for the days actually played.
    ExactDay,
}

impl FromStr for Accounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "paper" | "paper-quarter" => Ok(Accounting::PaperQuarter),
            "exact" | "exact-day" => Ok(Accounting::ExactDay),
            other => Err(Error::invalid(format!(
                "unknown accounting '{other}' (expected paper or exact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub ticket_price_cents: Cents,
    pub draws_per_day: u64,
    pub payout_per_ticket_cents: Cents,
    pub quarter_days: u64,
    pub schedule: Vec<u64>,
    pub extension: ExtensionRule,
    pub accounting: Accounting,
    pub player_cap: u64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        Self {
            ticket_price_cents: 100,
            draws_per_day: 2,
            payout_per_ticket_cents: 50_000,
            quarter_days: 60,
            schedule: vec![1, 2, 5, 12],
            extension: ExtensionRule::MinRecover,
            accounting: Accounting::PaperQuarter,
            player_cap: DEFAULT_PLAYER_CAP,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ticket_price_cents <= 0 || self.payout_per_ticket_cents <= 0 {
            return Err(Error::invalid("ticket price and payout must be positive"));
        }
        if self.draws_per_day == 0 || self.quarter_days == 0 || self.player_cap == 0 {
            return Err(Error::invalid(
                "draws per day, quarter length and player cap must be positive",
            ));
        }
        if self.schedule.is_empty() || self.schedule.contains(&0) {
            return Err(Error::invalid(
                "schedule must be nonempty with positive player counts",
            ));
        }
        if self.schedule.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("schedule must be nondecreasing"));
        }
        if let ExtensionRule::FixedRatio(r) = self.extension {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::invalid(format!(
                    "extension ratio must be positive, got {r}"
                )));
            }
        }
        Ok(())
    }

    /// Cost of one player playing every draw for `days` days.
    pub fn spend_per_player(&self, days: u64) -> Cents {
        self.ticket_price_cents * (self.draws_per_day * days) as Cents
    }

    pub fn quarter_spend(&self, players: u64) -> Cents {
        self.spend_per_player(self.quarter_days) * players as Cents
    }

    /// 0-based day on which the `gap_draws`-th draw after the last hit falls.
    pub fn win_day_for_gap(&self, gap_draws: u64) -> Result<u64> {
        if gap_draws == 0 {
            return Err(Error::invalid("gaps must be positive draw counts"));
        }
        Ok(gap_draws.div_ceil(self.draws_per_day) - 1)
    }
}

/// One quarter of the escalation plan, assuming every earlier quarter lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedQuarter {
    pub quarter: u64,
    pub players: u64,
    pub spend_cents: Cents,
    pub win_payout_cents: Cents,
    pub cumulative_loss_cents: Cents,
    /// Profit if this quarter wins: payout − spend − cumulative loss.
    pub net_cents: Cents,
}

/// Player count for the quarter after a losing run.
pub fn next_player_count(
    cumulative_loss: Cents,
    previous_net: Cents,
    previous_players: u64,
    config: &StrategyConfig,
) -> Result<u64> {
    let cap = config.player_cap;
    let players = match config.extension {
        ExtensionRule::MinRecover => {
            let margin = config.payout_per_ticket_cents - config.quarter_spend(1);
            let needed = cumulative_loss + previous_net;
            if needed <= 0 {
                1
            } else if margin <= 0 {
                return Err(Error::CapExceeded { cap });
            } else {
                (needed as u64).div_ceil(margin as u64)
            }
        }
        ExtensionRule::FixedRatio(r) => {
            let scaled = r * previous_players as f64;
            // Absorb representation error so that 2.4 × 5 is 12, not 13.
            let p = (scaled - 1e-9 * scaled.max(1.0)).ceil();
            if p.is_nan() || p > cap as f64 {
                return Err(Error::CapExceeded { cap });
            }
            (p as u64).max(1)
        }
    };
    if players > cap {
        return Err(Error::CapExceeded { cap });
    }
    Ok(players)
}

/// The first `quarters` quarters of the plan.
pub fn plan(quarters: u64, config: &StrategyConfig) -> Result<Vec<PlannedQuarter>> {
    config.validate()?;
    let mut out: Vec<PlannedQuarter> = Vec::with_capacity(quarters as usize);
    let mut cumulative_loss = 0;
    for q in 1..=quarters {
        let players = match (config.schedule.get(q as usize - 1), out.last()) {
            (Some(&p), _) => p,
            (None, Some(prev)) => {
                next_player_count(cumulative_loss, prev.net_cents, prev.players, config)?
            }
            (None, None) => unreachable!("schedule is nonempty"),
        };
        if players > config.player_cap {
            return Err(Error::CapExceeded {
                cap: config.player_cap,
            });
        }
        let spend = config.quarter_spend(players);
        let win_payout = config.payout_per_ticket_cents * players as Cents;
        out.push(PlannedQuarter {
            quarter: q,
            players,
            spend_cents: spend,
            win_payout_cents: win_payout,
            cumulative_loss_cents: cumulative_loss,
            net_cents: win_payout - spend - cumulative_loss,
        });
        cumulative_loss += spend;
    }
    Ok(out)
}

/// Profit if the stream wins in quarter `quarter` (1-based), charging full
/// quarters.
pub fn quarter_net(quarter: u64, config: &StrategyConfig) -> Result<Cents> {
    if quarter == 0 {
        return Err(Error::invalid("quarters are numbered from 1"));
    }
    Ok(plan(quarter, config)?[quarter as usize - 1].net_cents)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarterOutcome {
    Win,
    Loss,
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarterRecord {
    pub quarter: u64,
    pub players: u64,
    pub spend_cents: Cents,
    /// Payout actually received in this quarter.
    pub payout_cents: Cents,
    /// Profit had this quarter won (the plan figure).
    pub net_cents: Cents,
    pub cumulative_loss_cents: Cents,
    pub outcome: QuarterOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum StreamOutcome {
    Won { day: u64, quarter: u64 },
    Open { days_played: u64 },
}

/// How a stream ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamEnd {
    /// Win on this 0-based day.
    WinOnDay(u64),
    /// No win within this many days.
    NoWin { horizon_days: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamLedger {
    pub quarters: Vec<QuarterRecord>,
    pub outcome: StreamOutcome,
    pub total_spend_cents: Cents,
    pub total_payout_cents: Cents,
    pub profit_cents: Cents,
    /// Losses carried into the final quarter played.
    pub drawdown_cents: Cents,
    /// Largest number of players in any quarter.
    pub peak_players: u64,
}

pub fn simulate_stream(end: StreamEnd, config: &StrategyConfig) -> Result<StreamLedger> {
    config.validate()?;
    let qd = config.quarter_days;
    let (last_day, won) = match end {
        StreamEnd::WinOnDay(day) => (day, true),
        StreamEnd::NoWin { horizon_days: 0 } => {
            return Ok(StreamLedger {
                quarters: Vec::new(),
                outcome: StreamOutcome::Open { days_played: 0 },
                total_spend_cents: 0,
                total_payout_cents: 0,
                profit_cents: 0,
                drawdown_cents: 0,
                peak_players: 0,
            })
        }
        StreamEnd::NoWin { horizon_days } => (horizon_days - 1, false),
    };
    let final_quarter = last_day / qd + 1;
    let planned = plan(final_quarter, config)?;

    let mut quarters = Vec::with_capacity(planned.len());
    for p in &planned {
        let is_last = p.quarter == final_quarter;
        let spend = if is_last && config.accounting == Accounting::ExactDay {
            let days = last_day - (p.quarter - 1) * qd + 1;
            config.spend_per_player(days) * p.players as Cents
        } else {
            p.spend_cents
        };
        let (payout, outcome) = match (is_last, won) {
            (true, true) => (p.win_payout_cents, QuarterOutcome::Win),
            (true, false) => (0, QuarterOutcome::Open),
            _ => (0, QuarterOutcome::Loss),
        };
        quarters.push(QuarterRecord {
            quarter: p.quarter,
            players: p.players,
            spend_cents: spend,
            payout_cents: payout,
            net_cents: p.net_cents,
            cumulative_loss_cents: p.cumulative_loss_cents,
            outcome,
        });
    }
    let total_spend_cents: Cents = quarters.iter().map(|q| q.spend_cents).sum();
    let total_payout_cents: Cents = quarters.iter().map(|q| q.payout_cents).sum();
    let last = planned.last().expect("at least one quarter is played");
    Ok(StreamLedger {
        outcome: if won {
            StreamOutcome::Won {
                day: last_day,
                quarter: final_quarter,
            }
        } else {
            StreamOutcome::Open {
                days_played: last_day + 1,
            }
        },
        total_spend_cents,
        total_payout_cents,
        profit_cents: total_payout_cents - total_spend_cents,
        drawdown_cents: last.cumulative_loss_cents,
        peak_players: quarters.iter().map(|q| q.players).max().unwrap_or(0),
        quarters,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub gap_draws: u64,
    pub ledger: StreamLedger,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateLedger {
    pub streams: Vec<StreamSummary>,
    pub total_spend_cents: Cents,
    pub total_payout_cents: Cents,
    pub profit_cents: Cents,
    /// Largest peak-to-trough fall of the running balance when the streams
    /// are played back to back, sampled at quarter boundaries.
    pub max_drawdown_cents: Cents,
}

/// Plays one stream per gap, each ending in a win `gap` draws after the
/// previous hit.
pub fn simulate_streams(gaps: &[u64], config: &StrategyConfig) -> Result<AggregateLedger> {
    config.validate()?;
    let streams = gaps
        .iter()
        .map(|&gap| {
            let day = config.win_day_for_gap(gap)?;
            Ok(StreamSummary {
                gap_draws: gap,
                ledger: simulate_stream(StreamEnd::WinOnDay(day), config)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (mut balance, mut peak, mut max_drawdown): (Cents, Cents, Cents) = (0, 0, 0);
    for s in &streams {
        max_drawdown = max_drawdown.max(peak - (balance - s.ledger.drawdown_cents));
        balance += s.ledger.profit_cents;
        peak = peak.max(balance);
    }
    let total_spend_cents = streams.iter().map(|s| s.ledger.total_spend_cents).sum();
    let total_payout_cents = streams.iter().map(|s| s.ledger.total_payout_cents).sum();
    Ok(AggregateLedger {
        streams,
        total_spend_cents,
        total_payout_cents,
        profit_cents: total_payout_cents - total_spend_cents,
        max_drawdown_cents: max_drawdown,
    })
}

/// Total spend for a stream whose win only arrives `max_gap_draws` draws
/// in, charging full quarters.
pub fn required_budget(max_gap_draws: u64, config: &StrategyConfig) -> Result<Cents> {
    let day = config.win_day_for_gap(max_gap_draws)?;
    let quarters = plan(day / config.quarter_days + 1, config)?;
    let last = quarters.last().expect("at least one quarter");
    Ok(last.cumulative_loss_cents + last.spend_cents)
}

/// `$380`, `-$120`, `$3.50`.
pub fn format_money(cents: Cents) -> String {
    let sign = if cents < 0 { "-" } else { "" };
    let abs = cents.unsigned_abs();
    if abs.is_multiple_of(100) {
        format!("{sign}${}", abs / 100)
    } else {
        format!("{sign}${}.{:02}", abs / 100, abs % 100)
    }
}

/// Parses a dollar amount such as `500`, `1.5` or `0.25` into cents.
pub fn parse_money(text: &str) -> Result<Cents> {
    let text = text.trim().trim_start_matches('$');
    let bad = || Error::invalid(format!("'{text}' is not a dollar amount"));
    let (whole, frac) = text.split_once('.').unwrap_or((text, ""));
    if whole.is_empty() && frac.is_empty() || frac.len() > 2 {
        return Err(bad());
    }
    let whole: Cents = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| bad())?
    };
    let frac_cents: Cents = match frac.len() {
        0 => 0,
        1 => frac.parse::<Cents>().map_err(|_| bad())? * 10,
        _ => frac.parse().map_err(|_| bad())?,
    };
    if whole < 0 {
        return Err(bad());
    }
    Ok(whole * 100 + frac_cents)
}

/// Plain-text table of one stream.
pub fn render_ledger(ledger: &StreamLedger) -> String {
    let mut out = format!(
        "{:>7} {:>8} {:>12} {:>12} {:>14} {:>12}  outcome\n",
        "quarter", "players", "spend", "payout", "carried loss", "net if win"
    );
    for q in &ledger.quarters {
        out.push_str(&format!(
            "{:>7} {:>8} {:>12} {:>12} {:>14} {:>12}  {}\n",
            q.quarter,
            q.players,
            format_money(q.spend_cents),
            format_money(q.payout_cents),
            format_money(q.cumulative_loss_cents),
            format_money(q.net_cents),
            match q.outcome {
                QuarterOutcome::Win => "win",
                QuarterOutcome::Loss => "loss",
                QuarterOutcome::Open => "open",
            }
        ));
    }
    let outcome = match ledger.outcome {
        StreamOutcome::Won { day, quarter } => {
            format!("won on day {} (quarter {quarter})", day + 1)
        }
        StreamOutcome::Open { days_played } => {
            format!("no win after {days_played} days, position open")
        }
    };
    out.push_str(&format!(
        "{outcome}; spent {}, won {}, profit {}\n",
        format_money(ledger.total_spend_cents),
        format_money(ledger.total_payout_cents),
        format_money(ledger.profit_cents)
    ));
    if ledger.peak_players > MAX_COMBINATIONS_PER_PLAYER {
        out.push_str(&format!(
            "note: {} players exceeds the {MAX_COMBINATIONS_PER_PLAYER}-combination per-person limit if one person were to play them all\n",
            ledger.peak_players
        ));
    }
    out
}
