use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value from `{field}` at {point:?}")]
    Evaluation { field: String, point: Vec<f64> },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "κ̃ may be unbounded below \
         (minimum {value} on the search-box boundary at {point:?})"
    )]
    UnboundedBelow { point: Vec<f64>, value: f64 },

    #[error("refinement did not reach tolerance {tol} after {iterations} iterations")]
    Tolerance { tol: f64, iterations: usize },

    #[error("killing rate is negative ({value}) at {point:?}")]
    NegativeRate { point: Vec<f64>, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("empty sample")]
    EmptySample,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("fit window [{lo}, {hi}]: {reason}")]
    Window { lo: f64, hi: f64, reason: String },

    #[error(
        "all {replicas} replicas were killed before t = {t}; \
         raise the replica count or move the checkpoint earlier"
    )]
    Extinction { t: f64, replicas: usize },

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn eval(field: &str, point: &[f64]) -> Self {
        Error::Evaluation {
            field: field.to_string(),
            point: point.to_vec(),
        }
    }
}
