use bcl_core::GeomError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad config: {field}: {message}")]
    BadConfig { field: String, message: String },
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("report is not from a scan command")]
    NotAScan,
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn bad_config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::BadConfig {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code; every error that aborts a run is a usage error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Errors caused by the request rather than by the numerics. These abort the
/// run; the rest are recorded as failing checks.
pub fn is_usage_error(e: &GeomError) -> bool {
    matches!(
        e,
        GeomError::UnknownId(_)
            | GeomError::BadParameters(_)
            | GeomError::NotRepresentable { .. }
            | GeomError::MissingConnectionChart
            | GeomError::FocalLevel { .. }
            | GeomError::DimensionMismatch { .. }
    )
}

pub fn lift(e: GeomError) -> CliError {
    match e {
        GeomError::UnknownId(id) => CliError::UnknownExample(id),
        other => CliError::Geom(other),
    }
}
