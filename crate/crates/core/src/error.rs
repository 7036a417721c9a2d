use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("infeasible delay: total path {path_m:.6} m does not exceed the focal distance {focal_m:.6} m")]
    InfeasibleDelay { path_m: f64, focal_m: f64 },

    #[error("no admissible intersection: {0}")]
    NoSolution(String),

    #[error("scene generation failed after {attempts} attempts: {reason}")]
    SceneGeneration { attempts: usize, reason: String },

    #[error("invalid config at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(&'static str),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
