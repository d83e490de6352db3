//! Closed-form estimates of the Dirichlet concentration vector from a
//! count matrix.
//!
//! - MLE: `α̂ⱼ = α₀ fⱼ` with `fⱼ` the column mean and
//!   `α₀ = n (K-1) γ / (n Σ fⱼ ln fⱼ − Σⱼ fⱼ Σᵢ ln xᵢⱼ)`.
//! - Method of moments: the column mean `nⱼ / n`.
//! - Main diagonal: `α̂ⱼ = xⱼⱼ` on the trailing K×K window.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dm::{AlphaVector, CountMatrix};
use crate::error::{Error, Result};

/// Euler–Mascheroni constant at the printed precision used by the MLE.
pub const EULER_GAMMA: f64 = 0.577_215_664_90;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    #[serde(rename = "mle")]
    Mle,
    #[serde(rename = "mm", alias = "mom")]
    Mom,
    #[serde(rename = "md", alias = "main_diagonal")]
    MainDiagonal,
}

impl EstimatorKind {
    /// Report label, as printed next to predicted combinations.
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Mle => "MLE",
            EstimatorKind::Mom => "MM",
            EstimatorKind::MainDiagonal => "MD",
        }
    }

    pub fn flag(self) -> &'static str {
        match self {
            EstimatorKind::Mle => "mle",
            EstimatorKind::Mom => "mm",
            EstimatorKind::MainDiagonal => "md",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mle" => Ok(EstimatorKind::Mle),
            "mm" | "mom" => Ok(EstimatorKind::Mom),
            "md" | "main-diagonal" | "main_diagonal" => Ok(EstimatorKind::MainDiagonal),
            other => Err(Error::invalid(format!(
                "unknown estimator '{other}' (expected md, mm or mle)"
            ))),
        }
    }
}

/// An estimator together with its tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    pub kind: EstimatorKind,
    /// Added to every entry before the MLE is evaluated. Zero means entries
    /// must already be positive.
    pub mle_smoothing: f64,
    /// Exact-zero estimates are lifted to this value. Zero disables lifting.
    pub positivity_floor: f64,
}

impl Estimator {
    pub fn new(kind: EstimatorKind) -> Self {
        Self {
            kind,
            mle_smoothing: 0.0,
            positivity_floor: 0.0,
        }
    }

    pub fn with_smoothing(mut self, eps: f64) -> Self {
        self.mle_smoothing = eps;
        self
    }

    pub fn with_positivity_floor(mut self, floor: f64) -> Self {
        self.positivity_floor = floor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mle_smoothing.is_finite() && self.mle_smoothing >= 0.0) {
            return Err(Error::invalid(format!(
                "smoothing must be >= 0, got {}",
                self.mle_smoothing
            )));
        }
        if !(self.positivity_floor.is_finite() && self.positivity_floor >= 0.0) {
            return Err(Error::invalid(format!(
                "positivity floor must be >= 0, got {}",
                self.positivity_floor
            )));
        }
        Ok(())
    }

    pub fn fit(&self, x: &CountMatrix) -> Result<AlphaVector> {
        self.validate()?;
        let raw = match self.kind {
            EstimatorKind::Mle => estimate_mle(x, self.mle_smoothing)?,
            EstimatorKind::Mom => estimate_mom(x),
            EstimatorKind::MainDiagonal => estimate_main_diagonal(x)?,
        };
        self.apply_floor(raw)
    }

    pub(crate) fn apply_floor(&self, alpha: AlphaVector) -> Result<AlphaVector> {
        if self.positivity_floor > 0.0 {
            alpha.with_zeros_lifted(self.positivity_floor)
        } else {
            Ok(alpha)
        }
    }
}

/// Closed-form maximum likelihood estimate on `x + smoothing`.
pub fn estimate_mle(x: &CountMatrix, smoothing: f64) -> Result<AlphaVector> {
    if !(smoothing.is_finite() && smoothing >= 0.0) {
        return Err(Error::invalid(format!(
            "smoothing must be >= 0, got {smoothing}"
        )));
    }
    let k = x.cols();
    let mut log_sums = vec![0.0; k];
    for (i, row) in x.iter_rows().enumerate() {
        for (j, (&v, acc)) in row.iter().zip(log_sums.iter_mut()).enumerate() {
            let smoothed = f64::from(v) + smoothing;
            if smoothed <= 0.0 {
                return Err(Error::ZeroEntry { row: i, col: j });
            }
            *acc += smoothed.ln();
        }
    }
    mle_from_sums(x.col_sums(), &log_sums, x.rows(), smoothing)
}

/// MLE kernel from column sums `Σᵢ xᵢⱼ` and smoothed log sums `Σᵢ ln(xᵢⱼ + ε)`.
pub(crate) fn mle_from_sums(
    col_sums: &[u64],
    log_sums: &[f64],
    rows: usize,
    smoothing: f64,
) -> Result<AlphaVector> {
    let n = rows as f64;
    let k = col_sums.len() as f64;
    let f: Vec<f64> = col_sums
        .iter()
        .map(|&s| (s as f64 + n * smoothing) / n)
        .collect();
    let entropy_term: f64 = f
        .iter()
        .map(|&fj| if fj > 0.0 { fj * fj.ln() } else { 0.0 })
        .sum();
    let log_term: f64 = f.iter().zip(log_sums).map(|(&fj, &ls)| fj * ls).sum();
    let denominator = n * entropy_term - log_term;
    if denominator == 0.0 {
        return Err(Error::DegenerateData);
    }
    let alpha0 = n * (k - 1.0) * EULER_GAMMA / denominator;
    if !(alpha0.is_finite() && alpha0 > 0.0) {
        return Err(Error::NonPositiveAlpha(alpha0));
    }
    AlphaVector::new(f.iter().map(|&fj| alpha0 * fj).collect())
}

/// Method of moments: the column means `nⱼ / n`.
pub fn estimate_mom(x: &CountMatrix) -> AlphaVector {
    mom_from_sums(x.col_sums(), x.rows())
}

pub(crate) fn mom_from_sums(col_sums: &[u64], rows: usize) -> AlphaVector {
    let n = rows as f64;
    AlphaVector::new(col_sums.iter().map(|&s| s as f64 / n).collect())
        .expect("column means of a count matrix are finite and nonnegative")
}

/// Main diagonal of the trailing K×K window: `α̂ⱼ = x[n−K+j][j]`.
pub fn estimate_main_diagonal(x: &CountMatrix) -> Result<AlphaVector> {
    let (n, k) = (x.rows(), x.cols());
    if n < k {
        return Err(Error::InsufficientRows {
            needed: k,
            available: n,
        });
    }
    let offset = n - k;
    AlphaVector::new((0..k).map(|j| f64::from(x.get(offset + j, j))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[u32]]) -> CountMatrix {
        CountMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn mle_degenerate_constant_matrix() {
        let x = matrix(&[&[1, 1], &[1, 1]]);
        assert_eq!(estimate_mle(&x, 0.0), Err(Error::DegenerateData));
    }

    #[test]
    fn mle_two_by_two_hand_value() {
        // α₀ = 2·1·γ / (2·(2·1.5·ln1.5) − 2·1.5·ln2) = 3.2671126289...
        // α̂ = 1.5 α₀ = 4.9006689433... (40-digit evaluation).
        let x = matrix(&[&[1, 2], &[2, 1]]);
        let a = estimate_mle(&x, 0.0).unwrap();
        for &v in a.as_slice() {
            assert!((v - 4.900_668_943_394_794).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn mle_zero_entry() {
        let x = matrix(&[&[0, 3], &[2, 1]]);
        assert_eq!(
            estimate_mle(&x, 0.0),
            Err(Error::ZeroEntry { row: 0, col: 0 })
        );
        assert!(estimate_mle(&x, 0.5).is_ok());
    }

    #[test]
    fn mle_rejects_negative_smoothing() {
        let x = matrix(&[&[1, 2], &[2, 1]]);
        assert!(matches!(
            estimate_mle(&x, -0.1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn mle_proportions_follow_column_means() {
        let x = matrix(&[&[1, 2, 5], &[3, 3, 2], &[4, 1, 3], &[2, 2, 4]]);
        let a = estimate_mle(&x, 0.0).unwrap();
        let f: Vec<f64> = x.col_sums().iter().map(|&s| s as f64 / 4.0).collect();
        let fsum: f64 = f.iter().sum();
        for (aj, fj) in a.as_slice().iter().zip(&f) {
            assert!((aj / a.alpha0() - fj / fsum).abs() < 1e-15);
        }
    }

    #[test]
    fn mom_examples() {
        assert_eq!(
            estimate_mom(&matrix(&[&[1, 2], &[3, 4]])).as_slice(),
            &[2.0, 3.0]
        );
        assert_eq!(
            estimate_mom(&matrix(&[&[1, 0], &[0, 1]])).as_slice(),
            &[0.5, 0.5]
        );
        let r = [4u32, 0, 2, 1];
        assert_eq!(
            estimate_mom(&matrix(&[&r, &r, &r])).as_slice(),
            &[4.0, 0.0, 2.0, 1.0]
        );
    }

    #[test]
    fn main_diagonal_examples() {
        assert_eq!(
            estimate_main_diagonal(&matrix(&[&[1, 2], &[3, 4]]))
                .unwrap()
                .as_slice(),
            &[1.0, 4.0]
        );
        assert_eq!(
            estimate_main_diagonal(&matrix(&[&[9, 9], &[1, 2], &[3, 4]]))
                .unwrap()
                .as_slice(),
            &[1.0, 4.0]
        );
        let id = matrix(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(
            estimate_main_diagonal(&id).unwrap().as_slice(),
            &[1.0, 1.0, 1.0]
        );
        let short = matrix(&[&[1, 0, 0], &[0, 1, 0]]);
        assert_eq!(
            estimate_main_diagonal(&short),
            Err(Error::InsufficientRows {
                needed: 3,
                available: 2
            })
        );
    }

    #[test]
    fn main_diagonal_on_permuted_identity() {
        // Rows are one-hot at perm[i]; the diagonal reads row i at column i.
        let perm = [2usize, 0, 3, 1];
        let rows: Vec<Vec<u32>> = perm
            .iter()
            .map(|&c| (0..4).map(|j| u32::from(j == c)).collect())
            .collect();
        let x = CountMatrix::from_rows(&rows).unwrap();
        let want: Vec<f64> = perm
            .iter()
            .enumerate()
            .map(|(i, &c)| f64::from(u8::from(i == c)))
            .collect();
        assert_eq!(
            estimate_main_diagonal(&x).unwrap().as_slice(),
            want.as_slice()
        );
    }

    #[test]
    fn floor_lifts_only_zeros() {
        let est = Estimator::new(EstimatorKind::Mom).with_positivity_floor(0.25);
        let a = est.fit(&matrix(&[&[2, 0], &[2, 0]])).unwrap();
        assert_eq!(a.as_slice(), &[2.0, 0.25]);
        let plain = Estimator::new(EstimatorKind::Mom)
            .fit(&matrix(&[&[2, 0], &[2, 0]]))
            .unwrap();
        assert_eq!(plain.as_slice(), &[2.0, 0.0]);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(
            "md".parse::<EstimatorKind>().unwrap(),
            EstimatorKind::MainDiagonal
        );
        assert_eq!("MM".parse::<EstimatorKind>().unwrap(), EstimatorKind::Mom);
        assert_eq!("mle".parse::<EstimatorKind>().unwrap(), EstimatorKind::Mle);
        assert!("bayes".parse::<EstimatorKind>().is_err());
    }
}
