use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected} categories, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("zero entry at row {row}, column {col}: log of zero in the MLE denominator")]
    ZeroEntry { row: usize, col: usize },

    #[error("degenerate data: MLE denominator is zero")]
    DegenerateData,

    #[error("non-positive concentration estimate alpha0 = {0}")]
    NonPositiveAlpha(f64),

    #[error("insufficient rows: need {needed}, have {available}")]
    InsufficientRows { needed: usize, available: usize },

    #[error("line {line}: parse error: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: validation error: {rule}")]
    Validation { line: u64, rule: String },

    #[error("window out of range: end {end}, width {width}, rows {rows}")]
    WindowOutOfRange {
        end: usize,
        width: usize,
        rows: usize,
    },

    #[error("draw {draw_index}: {source}")]
    AtDraw {
        draw_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no player count up to the cap of {cap} satisfies the escalation rule")]
    CapExceeded { cap: u64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_draw(self, draw_index: usize) -> Self {
        Error::AtDraw {
            draw_index,
            source: Box::new(self),
        }
    }
}
