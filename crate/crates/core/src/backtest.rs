//! Walk-forward backtesting of the CDM prediction model.
//!
//! For every draw `t ≥ warmup` the estimator is fitted on draws before `t`,
//! the predictive expectation `m (αⱼ + nⱼ) / Σ (αⱼ + nⱼ)` is turned into a
//! combination, and the combination is scored against draw `t`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dm::{predictive_expectation, AlphaVector, CountMatrix, CountVector};
use crate::error::{Error, Result};
use crate::estimators::{mle_from_sums, mom_from_sums, Estimator, EstimatorKind};
use crate::ingest::{build_count_matrices, DrawHistory, DrawRecord, GameKind, GameSpec, Window};

/// Gap length separating short from long stretches.
pub const DEFAULT_STRETCH_CUTOFF: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    pub estimator: Estimator,
    pub window: Window,
    /// Draws observed before the first prediction.
    pub warmup: usize,
    /// Minimum match count recorded as a hit.
    pub hit_threshold: usize,
}

impl BacktestConfig {
    /// Window over all prior draws, warmup `max(K, 10)`, hits at a full match.
    pub fn new(spec: &GameSpec, estimator: Estimator) -> Self {
        Self {
            estimator,
            window: Window::All,
            warmup: default_warmup(spec),
            hit_threshold: spec.picks,
        }
    }

    pub fn validate(&self, spec: &GameSpec) -> Result<()> {
        self.estimator.validate()?;
        if self.warmup == 0 {
            return Err(Error::invalid("warmup must be at least 1"));
        }
        if self.estimator.kind == EstimatorKind::MainDiagonal && self.warmup < spec.pool {
            return Err(Error::invalid(format!(
                "main-diagonal estimator needs warmup >= {} (one row per category), got {}",
                spec.pool, self.warmup
            )));
        }
        if !(1..=spec.picks).contains(&self.hit_threshold) {
            return Err(Error::invalid(format!(
                "hit threshold must lie in 1..={}, got {}",
                spec.picks, self.hit_threshold
            )));
        }
        Ok(())
    }
}

pub fn default_warmup(spec: &GameSpec) -> usize {
    spec.pool.max(10)
}

/// A combination chosen from predictive scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedCombination {
    /// Ascending numbers for set draws, ordered digits for digit games.
    pub numbers: Vec<u32>,
    /// One score vector for set draws, one per position for digit games.
    pub scores: Vec<Vec<f64>>,
}

/// Top-M scores (set draws) or per-position argmax (digit games).
///
/// Ties go to the smaller category index. Non-finite scores are never chosen.
pub fn select_combination(scores: &[Vec<f64>], spec: &GameSpec) -> Result<PredictedCombination> {
    let numbers = match spec.kind {
        GameKind::SetDraw => {
            let [vector] = scores else {
                return Err(Error::invalid(format!(
                    "set-draw selection takes one score vector, got {}",
                    scores.len()
                )));
            };
            check_len(vector, spec.pool)?;
            let mut ranked: Vec<usize> = (0..vector.len())
                .filter(|&j| vector[j].is_finite())
                .collect();
            if ranked.len() < spec.picks {
                return Err(Error::invalid(format!(
                    "need {} finite scores, found {}",
                    spec.picks,
                    ranked.len()
                )));
            }
            ranked.sort_by(|&a, &b| vector[b].total_cmp(&vector[a]).then(a.cmp(&b)));
            let mut chosen: Vec<u32> = ranked[..spec.picks].iter().map(|&j| j as u32 + 1).collect();
            chosen.sort_unstable();
            chosen
        }
        GameKind::PositionalDigits => {
            if scores.len() != spec.picks {
                return Err(Error::invalid(format!(
                    "digit selection takes {} score vectors, got {}",
                    spec.picks,
                    scores.len()
                )));
            }
            scores
                .iter()
                .map(|vector| {
                    check_len(vector, spec.pool)?;
                    argmax(vector)
                        .map(|j| j as u32)
                        .ok_or_else(|| Error::invalid("position has no finite score"))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(PredictedCombination {
        numbers,
        scores: scores.to_vec(),
    })
}

fn check_len(vector: &[f64], k: usize) -> Result<()> {
    if vector.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: vector.len(),
        });
    }
    Ok(())
}

fn argmax(vector: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &v) in vector.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|b| v > vector[b]) {
            best = Some(j);
        }
    }
    best
}

/// Set draws: size of the intersection. Digit games: positions that agree.
pub fn match_count(prediction: &[u32], actual: &DrawRecord, spec: &GameSpec) -> Result<usize> {
    if prediction.len() != spec.picks || actual.numbers.len() != spec.picks {
        return Err(Error::invalid(format!(
            "combinations must have {} numbers, got {} and {}",
            spec.picks,
            prediction.len(),
            actual.numbers.len()
        )));
    }
    Ok(match spec.kind {
        GameKind::SetDraw => prediction
            .iter()
            .filter(|n| actual.numbers.contains(n))
            .count(),
        GameKind::PositionalDigits => prediction
            .iter()
            .zip(&actual.numbers)
            .filter(|(a, b)| a == b)
            .count(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrawOutcome {
    pub draw_index: usize,
    pub prediction: Vec<u32>,
    pub actual: Vec<u32>,
    pub match_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub estimator: EstimatorKind,
    pub hit_threshold: usize,
    pub draws: Vec<DrawOutcome>,
    pub hit_indices: Vec<usize>,
    pub gaps: Vec<u64>,
    pub average_gap: Option<f64>,
    pub max_gap: Option<u64>,
    pub hit_count: usize,
    /// `tier_histogram[m]` counts draws with exactly `m` matches.
    pub tier_histogram: Vec<usize>,
}

/// Prefix sums over one indicator matrix, so any window can be fitted in O(K).
struct MatrixIndex<'a> {
    matrix: &'a CountMatrix,
    prefix: Vec<u64>,
    indicator: bool,
}

impl<'a> MatrixIndex<'a> {
    fn new(matrix: &'a CountMatrix) -> Self {
        let k = matrix.cols();
        let mut prefix = vec![0u64; (matrix.rows() + 1) * k];
        for (i, row) in matrix.iter_rows().enumerate() {
            let (done, rest) = prefix.split_at_mut((i + 1) * k);
            let prev = &done[i * k..];
            for ((out, &p), &v) in rest[..k].iter_mut().zip(prev).zip(row) {
                *out = p + u64::from(v);
            }
        }
        let indicator = matrix.iter_rows().flatten().all(|&v| v <= 1);
        Self {
            matrix,
            prefix,
            indicator,
        }
    }

    fn col_sums(&self, start: usize, end: usize) -> Vec<u64> {
        let k = self.matrix.cols();
        let hi = &self.prefix[end * k..(end + 1) * k];
        let lo = &self.prefix[start * k..(start + 1) * k];
        hi.iter().zip(lo).map(|(h, l)| h - l).collect()
    }

    fn fit(&self, estimator: &Estimator, start: usize, end: usize) -> Result<AlphaVector> {
        let k = self.matrix.cols();
        let alpha = match estimator.kind {
            EstimatorKind::Mom => mom_from_sums(&self.col_sums(start, end), end - start),
            EstimatorKind::MainDiagonal => {
                if end < k {
                    return Err(Error::InsufficientRows {
                        needed: k,
                        available: end,
                    });
                }
                let offset = end - k;
                AlphaVector::new(
                    (0..k)
                        .map(|j| f64::from(self.matrix.get(offset + j, j)))
                        .collect(),
                )?
            }
            EstimatorKind::Mle if self.indicator => {
                let eps = estimator.mle_smoothing;
                let rows = end - start;
                let sums = self.col_sums(start, end);
                if eps == 0.0 {
                    if let Some(j) = sums.iter().position(|&s| (s as usize) < rows) {
                        let row = (start..end)
                            .find(|&i| self.matrix.get(i, j) == 0)
                            .expect("column with fewer ones than rows has a zero");
                        return Err(Error::ZeroEntry {
                            row: row - start,
                            col: j,
                        });
                    }
                }
                // Σᵢ ln(xᵢⱼ + ε) for a 0/1 column with sⱼ ones.
                let (ln_one, ln_zero) = ((1.0 + eps).ln(), eps.ln());
                let log_sums: Vec<f64> = sums
                    .iter()
                    .map(|&s| {
                        let zeros = (rows as u64 - s) as f64;
                        let ones = s as f64 * ln_one;
                        if zeros > 0.0 {
                            ones + zeros * ln_zero
                        } else {
                            ones
                        }
                    })
                    .collect();
                mle_from_sums(&sums, &log_sums, rows, eps)?
            }
            EstimatorKind::Mle => {
                return estimator.fit(&self.matrix.sub_rows(start, end)?);
            }
        };
        estimator.apply_floor(alpha)
    }

    /// Predictive expectation for the row after `end`, fitted on the window.
    fn predict(&self, config: &BacktestConfig, end: usize) -> Result<Vec<f64>> {
        let start = match config.window {
            Window::All => 0,
            Window::Last(w) => end.saturating_sub(w),
        };
        let alpha = self.fit(&config.estimator, start, end)?;
        let counts = CountVector::new(self.col_sums(start, end));
        let m = self
            .matrix
            .row_total()
            .ok_or_else(|| Error::invalid("draw matrix rows must share a common total"))?;
        predictive_expectation(&alpha, &counts, m)
    }
}

struct Engine<'a> {
    spec: &'a GameSpec,
    indices: Vec<MatrixIndex<'a>>,
}

impl<'a> Engine<'a> {
    fn new(spec: &'a GameSpec, matrices: &'a [CountMatrix]) -> Self {
        Self {
            spec,
            indices: matrices.iter().map(MatrixIndex::new).collect(),
        }
    }

    fn predict(&self, config: &BacktestConfig, end: usize) -> Result<PredictedCombination> {
        let scores = self
            .indices
            .iter()
            .map(|idx| idx.predict(config, end))
            .collect::<Result<Vec<_>>>()?;
        select_combination(&scores, self.spec)
    }
}

/// Runs the walk-forward backtest over every draw after the warmup.
///
/// Draws are evaluated in parallel; the result is identical to a sequential
/// run, and the first failing draw (in history order) is reported.
pub fn run_backtest(history: &DrawHistory, config: &BacktestConfig) -> Result<BacktestResult> {
    run_with(history, config, true)
}

fn run_with(
    history: &DrawHistory,
    config: &BacktestConfig,
    parallel: bool,
) -> Result<BacktestResult> {
    let spec = history.spec();
    config.validate(spec)?;
    if history.len() <= config.warmup {
        return Err(Error::InsufficientRows {
            needed: config.warmup + 1,
            available: history.len(),
        });
    }
    let matrices = build_count_matrices(history)?;
    let engine = Engine::new(spec, &matrices);
    let step = |t: usize| -> Result<DrawOutcome> {
        let actual = &history.records()[t];
        let prediction = engine.predict(config, t).map_err(|e| e.at_draw(t))?;
        let matches = match_count(&prediction.numbers, actual, spec)?;
        Ok(DrawOutcome {
            draw_index: t,
            prediction: prediction.numbers,
            actual: actual.numbers.clone(),
            match_count: matches,
        })
    };
    let outcomes: Vec<Result<DrawOutcome>> = if parallel {
        (config.warmup..history.len())
            .into_par_iter()
            .map(step)
            .collect()
    } else {
        (config.warmup..history.len()).map(step).collect()
    };
    let draws = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut tier_histogram = vec![0usize; spec.picks + 1];
    for d in &draws {
        tier_histogram[d.match_count] += 1;
    }
    let hit_indices: Vec<usize> = draws
        .iter()
        .filter(|d| d.match_count >= config.hit_threshold)
        .map(|d| d.draw_index)
        .collect();
    let summary = gap_stats(&hit_indices)?;
    Ok(BacktestResult {
        estimator: config.estimator.kind,
        hit_threshold: config.hit_threshold,
        draws,
        hit_count: hit_indices.len(),
        hit_indices,
        gaps: summary.gaps,
        average_gap: summary.average,
        max_gap: summary.max,
        tier_histogram,
    })
}

/// Prediction for the draw following the end of `history`.
pub fn predict_next(
    history: &DrawHistory,
    estimator: &Estimator,
    window: Window,
) -> Result<PredictedCombination> {
    estimator.validate()?;
    let matrices = build_count_matrices(history)?;
    let engine = Engine::new(history.spec(), &matrices);
    let config = BacktestConfig {
        estimator: *estimator,
        window,
        warmup: history.len(),
        hit_threshold: 1,
    };
    engine.predict(&config, history.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub gaps: Vec<u64>,
    pub average: Option<f64>,
    pub max: Option<u64>,
    /// Number of hit indices.
    pub count: usize,
}

pub fn gap_stats(hit_indices: &[usize]) -> Result<GapSummary> {
    if let Some(w) = hit_indices.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "hit indices must be strictly increasing, found {} then {}",
            w[0], w[1]
        )));
    }
    let gaps: Vec<u64> = hit_indices
        .windows(2)
        .map(|w| (w[1] - w[0]) as u64)
        .collect();
    let average = (!gaps.is_empty()).then(|| gaps.iter().sum::<u64>() as f64 / gaps.len() as f64);
    Ok(GapSummary {
        max: gaps.iter().copied().max(),
        average,
        gaps,
        count: hit_indices.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stretch {
    #[serde(rename = "S")]
    Short,
    #[serde(rename = "L")]
    Long,
}

impl fmt::Display for Stretch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stretch::Short => "S",
            Stretch::Long => "L",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchReport {
    pub cutoff: u64,
    pub labels: Vec<Stretch>,
    /// Adjacent label pairs that differ.
    pub alternations: usize,
    pub pairs: usize,
    pub alternation_fraction: Option<f64>,
}

/// Labels gaps `>= cutoff` long and the rest short, and measures how often
/// consecutive labels differ.
pub fn classify_stretches(gaps: &[u64], cutoff: u64) -> StretchReport {
    let labels: Vec<Stretch> = gaps
        .iter()
        .map(|&g| {
            if g >= cutoff {
                Stretch::Long
            } else {
                Stretch::Short
            }
        })
        .collect();
    let pairs = labels.len().saturating_sub(1);
    let alternations = labels.windows(2).filter(|w| w[0] != w[1]).count();
    StretchReport {
        cutoff,
        alternation_fraction: (pairs > 0).then(|| alternations as f64 / pairs as f64),
        labels,
        alternations,
        pairs,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapProjection {
    /// Least-squares fit `ln(gap) = intercept + slope · matches`.
    pub intercept: f64,
    pub slope: f64,
    pub projected: BTreeMap<usize, f64>,
}

/// Log-linear least-squares extrapolation of average gap by match count.
pub fn extrapolate_gaps(
    observed: &BTreeMap<usize, f64>,
    targets: &[usize],
) -> Result<GapProjection> {
    if observed.len() < 2 {
        return Err(Error::invalid(format!(
            "extrapolation needs at least 2 observed match counts, got {}",
            observed.len()
        )));
    }
    if let Some((m, g)) = observed.iter().find(|(_, &g)| !(g > 0.0 && g.is_finite())) {
        return Err(Error::invalid(format!(
            "gap for {m} matches must be positive, got {g}"
        )));
    }
    let n = observed.len() as f64;
    let mean_x = observed.keys().map(|&m| m as f64).sum::<f64>() / n;
    let mean_y = observed.values().map(|g| g.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (&m, &g) in observed {
        let dx = m as f64 - mean_x;
        sxy += dx * (g.ln() - mean_y);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let projected = targets
        .iter()
        .map(|&m| (m, (intercept + slope * m as f64).exp()))
        .collect();
    Ok(GapProjection {
        intercept,
        slope,
        projected,
    })
}

/// Report lines `"n1 n2 … nM [LABEL]"`, one per prediction, then the actual
/// draw labelled `[AC]`.
pub fn render_comparison(predictions: &[(&str, &[u32])], actual: &DrawRecord) -> Vec<String> {
    predictions
        .iter()
        .copied()
        .chain(std::iter::once(("AC", actual.numbers.as_slice())))
        .map(|(label, numbers)| render_line(numbers, label))
        .collect()
}

pub fn render_line(numbers: &[u32], label: &str) -> String {
    let mut line: String = numbers.iter().map(|n| format!("{n} ")).collect();
    line.push_str(&format!("[{label}]"));
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::slice_window;
    use crate::synth::synth_history;

    fn rec(numbers: &[u32]) -> DrawRecord {
        DrawRecord {
            draw_index: 0,
            date: None,
            numbers: numbers.to_vec(),
        }
    }

    #[test]
    fn select_top_m_with_tie_break() {
        let spec = GameSpec::set_draw(4, 2).unwrap();
        let c = select_combination(&[vec![0.1, 0.9, 0.9, 0.05]], &spec).unwrap();
        assert_eq!(c.numbers, vec![2, 3]);
        let c = select_combination(&[vec![0.25; 4]], &spec).unwrap();
        assert_eq!(c.numbers, vec![1, 2]);
    }

    #[test]
    fn select_positional_argmax() {
        let spec = GameSpec::pick(3).unwrap();
        let one_hot = |d: usize| {
            (0..10)
                .map(|j| if j == d { 0.5 } else { 0.05 })
                .collect::<Vec<_>>()
        };
        let c = select_combination(&[one_hot(7), one_hot(0), one_hot(4)], &spec).unwrap();
        assert_eq!(c.numbers, vec![7, 0, 4]);
        let tied = select_combination(&[vec![0.1; 10], one_hot(3), one_hot(3)], &spec).unwrap();
        assert_eq!(tied.numbers, vec![0, 3, 3]);
    }

    #[test]
    fn select_needs_enough_finite_scores() {
        let spec = GameSpec::set_draw(4, 3).unwrap();
        let err =
            select_combination(&[vec![1.0, f64::NAN, f64::INFINITY, 2.0]], &spec).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(select_combination(&[vec![1.0; 5]], &spec).is_err());
    }

    #[test]
    fn match_count_examples() {
        let spec = GameSpec::set_draw(52, 6).unwrap();
        let m = match_count(
            &[7, 13, 24, 34, 45, 47],
            &rec(&[7, 18, 30, 36, 44, 47]),
            &spec,
        )
        .unwrap();
        assert_eq!(m, 2);
        assert_eq!(
            match_count(&[1, 2, 3, 4, 5, 6], &rec(&[1, 2, 3, 4, 5, 6]), &spec).unwrap(),
            6
        );
        let pick = GameSpec::pick(3).unwrap();
        assert_eq!(match_count(&[1, 2, 3], &rec(&[3, 2, 1]), &pick).unwrap(), 1);
        assert!(match_count(&[1, 2], &rec(&[3, 2, 1]), &pick).is_err());
    }

    #[test]
    fn gap_stats_examples() {
        let s = gap_stats(&[0, 44, 659, 1357, 1369, 1915, 2039, 3449, 3685, 4285]).unwrap();
        assert_eq!(s.gaps, vec![44, 615, 698, 12, 546, 124, 1410, 236, 600]);
        assert!((s.average.unwrap() - 4285.0 / 9.0).abs() < 1e-12);
        assert_eq!(s.average.unwrap().round(), 476.0);
        assert_eq!(s.max, Some(1410));
        let single = gap_stats(&[5]).unwrap();
        assert!(single.gaps.is_empty() && single.average.is_none() && single.max.is_none());
        let even = gap_stats(&[0, 10, 20]).unwrap();
        assert_eq!(even.gaps, vec![10, 10]);
        assert_eq!(even.average, Some(10.0));
        assert!(gap_stats(&[3, 3]).is_err());
    }

    #[test]
    fn stretch_examples() {
        use Stretch::{Long as L, Short as S};
        let r = classify_stretches(&[44, 615, 698, 12, 546, 124, 1410, 236, 600], 500);
        assert_eq!(r.labels, vec![S, L, L, S, L, S, L, S, L]);
        assert_eq!((r.alternations, r.pairs), (7, 8));
        assert_eq!(r.alternation_fraction, Some(0.875));
        let r = classify_stretches(&[1, 2, 3], 500);
        assert_eq!(r.labels, vec![S, S, S]);
        assert_eq!(r.alternation_fraction, Some(0.0));
        let r = classify_stretches(&[1, 900, 2, 800], 500);
        assert_eq!(r.alternation_fraction, Some(1.0));
        let r = classify_stretches(&[], 500);
        assert!(r.labels.is_empty() && r.alternation_fraction.is_none());
    }

    #[test]
    fn extrapolation_examples() {
        let obs = BTreeMap::from([(2, 12.0), (3, 105.0), (4, 529.0)]);
        let p = extrapolate_gaps(&obs, &[5, 6]).unwrap();
        assert!(p.slope > 0.0);
        assert!(p.projected[&6] > p.projected[&5] && p.projected[&5] > 529.0);
        let exact = extrapolate_gaps(&BTreeMap::from([(2, 10.0), (3, 100.0)]), &[4]).unwrap();
        assert!((exact.projected[&4] - 1000.0).abs() < 1e-9);
        assert!(extrapolate_gaps(&BTreeMap::from([(2, 12.0)]), &[3]).is_err());
    }

    #[test]
    fn render_examples() {
        let md = [11, 19, 27, 37, 39, 45];
        let mm = [11, 19, 28, 36, 39, 45];
        let lines = render_comparison(&[("MD", &md), ("MM", &mm)], &rec(&[6, 24, 29, 35, 41, 44]));
        assert_eq!(
            lines,
            vec![
                "11 19 27 37 39 45 [MD]",
                "11 19 28 36 39 45 [MM]",
                "6 24 29 35 41 44 [AC]"
            ]
        );
        assert_eq!(render_comparison(&[], &rec(&[1, 2, 3])), vec!["1 2 3 [AC]"]);
        assert_eq!(render_line(&[5, 0, 9], "MD"), "5 0 9 [MD]");
    }

    #[test]
    fn repeated_draws_hit_every_time() {
        // Every draw is {2, 5, 7}; after any prefix those three columns carry
        // all the mass, so MoM over all prior draws predicts exactly them.
        let spec = GameSpec::set_draw(8, 3).unwrap();
        let records = (0..10)
            .map(|i| DrawRecord {
                draw_index: i,
                date: None,
                numbers: vec![2, 5, 7],
            })
            .collect();
        let history = DrawHistory::new(spec.clone(), records).unwrap();
        let config = BacktestConfig {
            estimator: Estimator::new(EstimatorKind::Mom),
            window: Window::All,
            warmup: 1,
            hit_threshold: 3,
        };
        let r = run_backtest(&history, &config).unwrap();
        assert_eq!(r.hit_indices, (1..10).collect::<Vec<_>>());
        assert_eq!(r.gaps, vec![1; 8]);
        assert!(r.draws.iter().all(|d| d.prediction == vec![2, 5, 7]));
    }

    #[test]
    fn history_shorter_than_warmup() {
        let spec = GameSpec::set_draw(52, 6).unwrap();
        let h = synth_history(&spec, 20, 1).unwrap();
        let config = BacktestConfig::new(&spec, Estimator::new(EstimatorKind::Mom));
        assert!(matches!(
            run_backtest(&h, &config),
            Err(Error::InsufficientRows { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let spec = GameSpec::set_draw(52, 6).unwrap();
        let mut c = BacktestConfig::new(&spec, Estimator::new(EstimatorKind::MainDiagonal));
        assert!(c.validate(&spec).is_ok());
        c.warmup = 20;
        assert!(c.validate(&spec).is_err());
        c.warmup = 60;
        c.hit_threshold = 7;
        assert!(c.validate(&spec).is_err());
        c.hit_threshold = 0;
        assert!(c.validate(&spec).is_err());
    }

    #[test]
    fn mle_without_smoothing_fails_with_draw_context() {
        let spec = GameSpec::set_draw(20, 5).unwrap();
        let h = synth_history(&spec, 40, 3).unwrap();
        let config = BacktestConfig::new(&spec, Estimator::new(EstimatorKind::Mle));
        let err = run_backtest(&h, &config).unwrap_err();
        assert!(
            matches!(err, Error::AtDraw { draw_index: 20, ref source } if matches!(**source, Error::ZeroEntry { .. }))
        );
    }

    // Straight replay through the public window/estimator/prediction functions.
    fn naive_backtest(history: &DrawHistory, config: &BacktestConfig) -> Vec<DrawOutcome> {
        let spec = history.spec();
        let matrices = build_count_matrices(history).unwrap();
        (config.warmup..history.len())
            .map(|t| {
                let scores: Vec<Vec<f64>> = matrices
                    .iter()
                    .map(|m| {
                        let width = match config.window {
                            Window::All => Window::All,
                            Window::Last(w) => Window::Last(w.min(t)),
                        };
                        let window = slice_window(m, t, width).unwrap();
                        let fit_on = match config.estimator.kind {
                            EstimatorKind::MainDiagonal => {
                                slice_window(m, t, Window::Last(m.cols())).unwrap()
                            }
                            _ => window.clone(),
                        };
                        let alpha = config.estimator.fit(&fit_on).unwrap();
                        predictive_expectation(
                            &alpha,
                            &window.col_sum_vector(),
                            m.row_total().unwrap(),
                        )
                        .unwrap()
                    })
                    .collect();
                let prediction = select_combination(&scores, spec).unwrap().numbers;
                let actual = &history.records()[t];
                DrawOutcome {
                    draw_index: t,
                    match_count: match_count(&prediction, actual, spec).unwrap(),
                    prediction,
                    actual: actual.numbers.clone(),
                }
            })
            .collect()
    }

    #[test]
    fn engine_matches_naive_replay() {
        let games = [
            GameSpec::set_draw(15, 4).unwrap(),
            GameSpec::pick(3).unwrap(),
        ];
        let estimators = [
            Estimator::new(EstimatorKind::Mom),
            Estimator::new(EstimatorKind::MainDiagonal),
            Estimator::new(EstimatorKind::Mle).with_smoothing(0.5),
            Estimator::new(EstimatorKind::MainDiagonal).with_positivity_floor(0.1),
        ];
        for spec in &games {
            let history = synth_history(spec, 120, 11).unwrap();
            for estimator in estimators {
                for window in [Window::All, Window::Last(25)] {
                    let config = BacktestConfig {
                        window,
                        ..BacktestConfig::new(spec, estimator)
                    };
                    let fast = run_backtest(&history, &config).unwrap();
                    assert_eq!(
                        fast.draws,
                        naive_backtest(&history, &config),
                        "{spec} {estimator:?} {window}"
                    );
                }
            }
        }
    }

    #[test]
    fn parallel_equals_sequential() {
        let spec = GameSpec::set_draw(30, 5).unwrap();
        let history = synth_history(&spec, 400, 5).unwrap();
        let config = BacktestConfig {
            hit_threshold: 2,
            ..BacktestConfig::new(&spec, Estimator::new(EstimatorKind::Mom))
        };
        let a = run_with(&history, &config, true).unwrap();
        let b = run_with(&history, &config, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hits_are_exactly_the_threshold_draws() {
        let spec = GameSpec::set_draw(12, 3).unwrap();
        let history = synth_history(&spec, 200, 9).unwrap();
        for threshold in 1..=3 {
            let config = BacktestConfig {
                hit_threshold: threshold,
                ..BacktestConfig::new(&spec, Estimator::new(EstimatorKind::Mom))
            };
            let r = run_backtest(&history, &config).unwrap();
            let rescanned: Vec<usize> = r
                .draws
                .iter()
                .filter(|d| d.match_count >= threshold)
                .map(|d| d.draw_index)
                .collect();
            assert_eq!(r.hit_indices, rescanned);
            assert_eq!(r.tier_histogram.iter().sum::<usize>(), r.draws.len());
        }
    }

    #[test]
    fn predict_next_uses_full_history() {
        let spec = GameSpec::set_draw(8, 3).unwrap();
        let records = (0..10)
            .map(|i| DrawRecord {
                draw_index: i,
                date: None,
                numbers: if i % 2 == 0 {
                    vec![1, 2, 3]
                } else {
                    vec![1, 2, 8]
                },
            })
            .collect();
        let history = DrawHistory::new(spec, records).unwrap();
        let p = predict_next(&history, &Estimator::new(EstimatorKind::Mom), Window::All).unwrap();
        // Counts: 1 and 2 appear 10 times, 3 and 8 five times; tie goes to 3.
        assert_eq!(p.numbers, vec![1, 2, 3]);
        assert_eq!(p.scores.len(), 1);
    }
}
