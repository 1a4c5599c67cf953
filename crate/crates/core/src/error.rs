use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("frames differ; mass functions over different frames cannot be combined")]
    FrameMismatch,

    #[error("total conflict (k = {conflict}); Dempster combination is undefined")]
    TotalConflict { conflict: f64 },

    #[error("value {value} for `{variable}` is outside [{lo}, {hi}]")]
    OutOfRange {
        variable: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("no rule fired: aggregated output has zero area")]
    NoRuleFired,

    #[error("cannot normalize {factor} for `{stock}`: basis {basis} is not positive")]
    Normalization {
        stock: String,
        factor: String,
        basis: f64,
    },

    #[error("empty series: {0}")]
    EmptySeries(&'static str),

    #[error("S/R ratio undefined: mean return is zero")]
    UndefinedRatio,

    #[error("skewness undefined for degenerate triangle ({a}, {b}, {c})")]
    UndefinedSkewness { a: f64, b: f64, c: f64 },

    #[error("objective undefined: weighted semivariance is zero")]
    ObjectiveUndefined,

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
