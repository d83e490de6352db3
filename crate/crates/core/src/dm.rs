//! Multinomial, Dirichlet and Compound-Dirichlet-Multinomial distributions.
//!
//! Every density is returned in log space. Factorials are evaluated as
//! `ln Γ(k + 1)` so that realistic draw histories (column totals in the
//! tens of thousands) never overflow.
//!
//! Conjugacy: with prior `p ~ Dir(α)` and counts `x | p ~ Mult(n, p)` the
//! posterior is `Dir(α + x)`, and the marginal of `x` is the CDM
//!
//! ```text
//! P(x | α) = n! Γ(α₀) / Γ(n + α₀) · Π Γ(xⱼ + αⱼ) / (xⱼ! Γ(αⱼ))
//! ```
//!
//! The posterior predictive for a future count vector `z` is the same CDM
//! with `α` replaced by `α + x`.

use crate::error::{Error, Result};

const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

// Callers guarantee x > 0.
#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub(crate) fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::invalid("probability vector is empty"));
        }
        if let Some(bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::invalid(format!(
                "probability entry {bad} outside [0, 1]"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { p })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Nonnegative integer counts per category. The total is always recomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    x: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(x: Vec<u64>) -> Self {
        let total = x.iter().sum();
        Self { x, total }
    }

    pub fn zeros(k: usize) -> Self {
        Self::new(vec![0; k])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.x
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

impl From<Vec<u64>> for CountVector {
    fn from(x: Vec<u64>) -> Self {
        Self::new(x)
    }
}

/// Dirichlet concentration parameters.
///
/// Zero entries are allowed so that estimator output can be stored as-is;
/// the density functions reject them, [`predictive_expectation`] does not.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    alpha: Vec<f64>,
    alpha0: f64,
}

impl AlphaVector {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::invalid("alpha vector is empty"));
        }
        if let Some(bad) = alpha.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!(
                "alpha entry {bad} is not a finite nonnegative real"
            )));
        }
        let alpha0 = alpha.iter().sum();
        Ok(Self { alpha, alpha0 })
    }

    pub fn symmetric(k: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.alpha
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.alpha.iter().all(|&a| a > 0.0)
    }

    /// Replaces exact zeros with `floor`. Positive entries are untouched.
    pub fn with_zeros_lifted(&self, floor: f64) -> Result<Self> {
        Self::new(
            self.alpha
                .iter()
                .map(|&a| if a == 0.0 { floor } else { a })
                .collect(),
        )
    }

    fn require_positive(&self) -> Result<()> {
        match self.alpha.iter().position(|&a| a <= 0.0) {
            Some(j) => Err(Error::domain(format!(
                "density requires every alpha > 0, alpha[{j}] = {}",
                self.alpha[j]
            ))),
            None => Ok(()),
        }
    }
}

/// Row-major n×K matrix of nonnegative counts.
///
/// Draw matrices have a common row sum `M`; estimator inputs need not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    row_total: Option<u64>,
    data: Vec<u32>,
    col_sums: Vec<u64>,
}

impl CountMatrix {
    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(rows.len(), cols, data)
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::invalid("count matrix needs at least one row"));
        }
        if cols < 2 {
            return Err(Error::invalid("count matrix needs at least two columns"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let mut col_sums = vec![0u64; cols];
        let mut totals = data
            .chunks_exact(cols)
            .map(|row| row.iter().map(|&v| u64::from(v)).sum::<u64>());
        let first = totals.next();
        let row_total = first.filter(|&m| totals.all(|t| t == m));
        for row in data.chunks_exact(cols) {
            for (acc, &v) in col_sums.iter_mut().zip(row) {
                *acc += u64::from(v);
            }
        }
        Ok(Self {
            rows,
            cols,
            row_total,
            data,
            col_sums,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// The common row sum `M`, if every row has the same total.
    pub fn row_total(&self) -> Option<u64> {
        self.row_total
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn col_sum_vector(&self) -> CountVector {
        CountVector::new(self.col_sums.clone())
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u32] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[u32]> {
        self.data.chunks_exact(self.cols)
    }

    /// Rows `[start, end)` as a new matrix.
    pub fn sub_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.rows {
            return Err(Error::WindowOutOfRange {
                end,
                width: end.saturating_sub(start),
                rows: self.rows,
            });
        }
        Self::from_flat(
            end - start,
            self.cols,
            self.data[start * self.cols..end * self.cols].to_vec(),
        )
    }
}

/// Log of the multinomial pmf. Returns `-inf` when a zero-probability
/// category has a positive count.
pub fn multinomial_log_pmf(x: &CountVector, p: &ProbabilityVector) -> Result<f64> {
    check_dims(p.len(), x.len())?;
    let mut log_pmf = ln_factorial(x.total());
    for (&xj, &pj) in x.as_slice().iter().zip(p.as_slice()) {
        if xj == 0 {
            continue;
        }
        if pj == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log_pmf += xj as f64 * pj.ln() - ln_factorial(xj);
    }
    Ok(log_pmf)
}

/// Log of the Dirichlet density at `p`.
pub fn dirichlet_log_pdf(p: &ProbabilityVector, alpha: &AlphaVector) -> Result<f64> {
    check_dims(alpha.len(), p.len())?;
    alpha.require_positive()?;
    let mut log_pdf = ln_gamma(alpha.alpha0());
    for (j, (&pj, &aj)) in p.as_slice().iter().zip(alpha.as_slice()).enumerate() {
        log_pdf -= ln_gamma(aj);
        if pj == 0.0 {
            if aj < 1.0 {
                return Err(Error::domain(format!(
                    "Dirichlet density is unbounded at p[{j}] = 0 with alpha[{j}] = {aj} < 1"
                )));
            }
            if aj > 1.0 {
                return Ok(f64::NEG_INFINITY);
            }
            continue;
        }
        log_pdf += (aj - 1.0) * pj.ln();
    }
    Ok(log_pdf)
}

/// Conjugate update `Dir(α) → Dir(α + x)`.
pub fn dirichlet_posterior(alpha: &AlphaVector, x: &CountVector) -> Result<AlphaVector> {
    check_dims(alpha.len(), x.len())?;
    AlphaVector::new(
        alpha
            .as_slice()
            .iter()
            .zip(x.as_slice())
            .map(|(&a, &c)| a + c as f64)
            .collect(),
    )
}

/// Log of the Compound-Dirichlet-Multinomial pmf with total `n = Σ xⱼ`.
///
/// A count matrix is scored by passing its column-sum vector; the leading
/// multinomial coefficient then uses the grand total of the matrix, which
/// is what makes the pmf normalise over column-sum vectors.
pub fn cdm_log_pmf(x: &CountVector, alpha: &AlphaVector) -> Result<f64> {
    check_dims(alpha.len(), x.len())?;
    alpha.require_positive()?;
    let n = x.total();
    let alpha0 = alpha.alpha0();
    let mut log_pmf = ln_factorial(n) + ln_gamma(alpha0) - ln_gamma(n as f64 + alpha0);
    for (&xj, &aj) in x.as_slice().iter().zip(alpha.as_slice()) {
        if xj > 0 {
            log_pmf += ln_gamma(xj as f64 + aj) - ln_gamma(aj) - ln_factorial(xj);
        }
    }
    Ok(log_pmf)
}

// total · wⱼ / Σw, shared by both expectation routes so that they agree bit for bit.
fn scaled_profile(weights: &[f64], total: f64) -> Result<Vec<f64>> {
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::domain(format!(
            "expectation needs a positive total concentration, got {sum}"
        )));
    }
    Ok(weights.iter().map(|&w| total * w / sum).collect())
}

/// Mean count vector `n αⱼ / α₀` of the CDM.
pub fn cdm_expectation(alpha: &AlphaVector, total: u64) -> Result<Vec<f64>> {
    scaled_profile(alpha.as_slice(), total as f64)
}

/// Log pmf of a future count vector `z` given past counts: the CDM under
/// the posterior concentration `α + counts`.
pub fn posterior_predictive_log_pmf(
    z: &CountVector,
    alpha: &AlphaVector,
    counts: &CountVector,
) -> Result<f64> {
    cdm_log_pmf(z, &dirichlet_posterior(alpha, counts)?)
}

/// The CDM prediction model: `m (αⱼ + nⱼ) / Σ (αⱼ + nⱼ)`.
///
/// Zero alpha entries are accepted as long as the posterior weights keep a
/// positive sum.
pub fn predictive_expectation(
    alpha: &AlphaVector,
    counts: &CountVector,
    m: u64,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::invalid("prediction total m must be positive"));
    }
    let posterior = dirichlet_posterior(alpha, counts)?;
    scaled_profile(posterior.as_slice(), m as f64)
}

/// Posterior density of a Bernoulli success probability under a uniform
/// prior after `s` successes in `n` trials: `p^s (1-p)^(n-s) / B(s+1, n-s+1)`.
pub fn beta_bernoulli_posterior_pdf(p: f64, s: u64, n: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    if s > n {
        return Err(Error::invalid(format!("successes {s} exceed trials {n}")));
    }
    // 1 / B(s+1, n-s+1) = (n+1)! / (s! (n-s)!)
    let log_norm = ln_factorial(n + 1) - ln_factorial(s) - ln_factorial(n - s);
    let log_kernel = s as f64 * p.ln() + (n - s) as f64 * (1.0 - p).ln();
    Ok((log_norm + log_kernel).exp())
}
