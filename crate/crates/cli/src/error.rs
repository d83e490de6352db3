use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable input files, or values outside a precondition.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] cdm_core::Error),

    /// A model error inside one simulated stream.
    #[error("stream {index} (gap {gap} draws): {source}")]
    Stream {
        index: usize,
        gap: u64,
        #[source]
        source: cdm_core::Error,
    },

    /// A failure while producing output, such as an unwritable path.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for usage and validation errors, 1 for runtime and model errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(e) | CliError::Stream { source: e, .. } => model_exit_code(e),
            CliError::Runtime(_) => 1,
        }
    }
}

fn model_exit_code(e: &cdm_core::Error) -> i32 {
    use cdm_core::Error;
    match e {
        Error::InvalidInput(_)
        | Error::Parse { .. }
        | Error::Validation { .. }
        | Error::DimensionMismatch { .. } => 2,
        Error::AtDraw { source, .. } => model_exit_code(source),
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_error_class() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::from(cdm_core::Error::DegenerateData).exit_code(),
            1
        );
        assert_eq!(
            CliError::from(cdm_core::Error::Parse {
                line: 3,
                message: "x".into()
            })
            .exit_code(),
            2
        );
        let nested = cdm_core::Error::AtDraw {
            draw_index: 7,
            source: Box::new(cdm_core::Error::ZeroEntry { row: 0, col: 1 }),
        };
        assert_eq!(CliError::from(nested).exit_code(), 1);
    }
}
