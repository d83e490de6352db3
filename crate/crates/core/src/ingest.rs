//! Draw history files and their indicator count matrices.
//!
//! File format, one draw per line, oldest first:
//!
//! ```text
//! draw_index,date,numbers
//! 0,2022-07-09,6 24 29 35 41 44
//! 1,,7 13 22 31 45 46
//! ```
//!
//! The header is optional and recognised by a non-numeric first field.
//! `date` may be empty and is carried through untouched.

use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::dm::CountMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    /// M distinct numbers from 1..=K, order irrelevant.
    SetDraw,
    /// M digits 0..=9 with repetition, order significant.
    PositionalDigits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSpec {
    pub kind: GameKind,
    /// Category count: pool size for set draws, 10 for digit games.
    pub pool: usize,
    /// Numbers per draw (set draws) or digit positions (digit games).
    pub picks: usize,
    pub label: String,
}

impl GameSpec {
    pub fn set_draw(pool: usize, picks: usize) -> Result<Self> {
        let spec = Self {
            kind: GameKind::SetDraw,
            pool,
            picks,
            label: format!("{picks}/{pool}"),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn pick(positions: usize) -> Result<Self> {
        let spec = Self {
            kind: GameKind::PositionalDigits,
            pool: 10,
            picks: positions,
            label: format!("pick-{positions}"),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            GameKind::SetDraw if !(2 <= self.picks && self.picks < self.pool) => {
                Err(Error::invalid(format!(
                    "set-draw game needs 2 <= picks < pool, got picks {} and pool {}",
                    self.picks, self.pool
                )))
            }
            GameKind::PositionalDigits if self.pool != 10 => Err(Error::invalid(format!(
                "digit game must have 10 categories, got {}",
                self.pool
            ))),
            GameKind::PositionalDigits if !(1..=6).contains(&self.picks) => Err(Error::invalid(
                format!("digit game needs 1 to 6 positions, got {}", self.picks),
            )),
            _ => Ok(()),
        }
    }

    /// Checks one draw's numbers, returning the violated rule.
    pub fn check_numbers(&self, numbers: &[u32]) -> std::result::Result<(), String> {
        if numbers.len() != self.picks {
            return Err(format!(
                "expected {} numbers, found {}",
                self.picks,
                numbers.len()
            ));
        }
        match self.kind {
            GameKind::SetDraw => {
                if let Some(&n) = numbers.iter().find(|&&n| n == 0 || n as usize > self.pool) {
                    return Err(format!("number {n} outside 1..={}", self.pool));
                }
                let mut seen = vec![false; self.pool + 1];
                for &n in numbers {
                    if std::mem::replace(&mut seen[n as usize], true) {
                        return Err(format!("number {n} drawn twice"));
                    }
                }
            }
            GameKind::PositionalDigits => {
                if let Some(&d) = numbers.iter().find(|&&d| d > 9) {
                    return Err(format!("digit {d} outside 0..=9"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawRecord {
    pub draw_index: usize,
    pub date: Option<String>,
    pub numbers: Vec<u32>,
}

/// A validated, chronologically ordered list of draws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DrawHistory {
    spec: GameSpec,
    records: Vec<DrawRecord>,
}

impl DrawHistory {
    /// Validates every record against `spec` and the contiguous-index rule.
    pub fn new(spec: GameSpec, records: Vec<DrawRecord>) -> Result<Self> {
        spec.validate()?;
        for (pos, rec) in records.iter().enumerate() {
            let line = pos as u64 + 1;
            if rec.draw_index != pos {
                return Err(Error::Validation {
                    line,
                    rule: format!(
                        "draw_index {} out of sequence, expected {pos}",
                        rec.draw_index
                    ),
                });
            }
            spec.check_numbers(&rec.numbers)
                .map_err(|rule| Error::Validation { line, rule })?;
        }
        Ok(Self { spec, records })
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn records(&self) -> &[DrawRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Serialises to the history file format (no header).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            let numbers: Vec<String> = rec.numbers.iter().map(u32::to_string).collect();
            out.push_str(&format!(
                "{},{},{}\n",
                rec.draw_index,
                rec.date.as_deref().unwrap_or(""),
                numbers.join(" ")
            ));
        }
        out
    }
}

/// Parses and validates a history file.
pub fn parse_history<R: Read>(input: R, spec: &GameSpec) -> Result<DrawHistory> {
    spec.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut records = Vec::new();
    let mut first = true;
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.iter().all(str::is_empty) {
            continue;
        }
        let is_header = first && row.get(0).is_some_and(|f| f.parse::<u64>().is_err());
        first = false;
        if is_header {
            continue;
        }
        if row.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected 3 fields (draw_index,date,numbers), found {}",
                    row.len()
                ),
            });
        }
        let draw_index: usize = row[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("draw_index '{}' is not a nonnegative integer", &row[0]),
        })?;
        let date = (!row[1].is_empty()).then(|| row[1].to_string());
        let numbers = row[2]
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>().map_err(|_| Error::Parse {
                    line,
                    message: format!("'{tok}' is not a nonnegative integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        if draw_index != records.len() {
            return Err(Error::Validation {
                line,
                rule: format!(
                    "draw_index {draw_index} out of sequence, expected {}",
                    records.len()
                ),
            });
        }
        spec.check_numbers(&numbers)
            .map_err(|rule| Error::Validation { line, rule })?;
        records.push(DrawRecord {
            draw_index,
            date,
            numbers,
        });
    }
    Ok(DrawHistory {
        spec: spec.clone(),
        records,
    })
}

/// Indicator count matrices for a history.
///
/// Set draws give one n×K 0/1 matrix (column `j` is number `j + 1`). Digit
/// games give one n×10 one-hot matrix per position.
pub fn build_count_matrices(history: &DrawHistory) -> Result<Vec<CountMatrix>> {
    if history.is_empty() {
        return Err(Error::invalid(
            "cannot build count matrices from an empty history",
        ));
    }
    let spec = history.spec();
    let n = history.len();
    let k = spec.pool;
    match spec.kind {
        GameKind::SetDraw => {
            let mut data = vec![0u32; n * k];
            for (i, rec) in history.records().iter().enumerate() {
                for &num in &rec.numbers {
                    data[i * k + num as usize - 1] = 1;
                }
            }
            Ok(vec![CountMatrix::from_flat(n, k, data)?])
        }
        GameKind::PositionalDigits => (0..spec.picks)
            .map(|pos| {
                let mut data = vec![0u32; n * k];
                for (i, rec) in history.records().iter().enumerate() {
                    data[i * k + rec.numbers[pos] as usize] = 1;
                }
                CountMatrix::from_flat(n, k, data)
            })
            .collect(),
    }
}

/// How many trailing rows a fit may see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    All,
    Last(usize),
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::All => f.write_str("all"),
            Window::Last(w) => write!(f, "{w}"),
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(Window::All);
        }
        match s.parse::<usize>() {
            Ok(w) if w > 0 => Ok(Window::Last(w)),
            _ => Err(Error::invalid(format!(
                "window must be a positive integer or 'all', got '{s}'"
            ))),
        }
    }
}

/// Rows `[end − width, end)`, or `[0, end)` for [`Window::All`].
pub fn slice_window(matrix: &CountMatrix, end: usize, width: Window) -> Result<CountMatrix> {
    let rows = matrix.rows();
    let start = match width {
        Window::All => 0,
        Window::Last(w) if w > 0 && w <= end => end - w,
        Window::Last(w) => {
            return Err(Error::WindowOutOfRange {
                end,
                width: w,
                rows,
            })
        }
    };
    if end == 0 || end > rows {
        return Err(Error::WindowOutOfRange {
            end,
            width: end - start,
            rows,
        });
    }
    matrix.sub_rows(start, end)
}
