use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("metric is not positive definite at {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },
    #[error(
        "metric is not symmetric: g[{i}][{j}] = {upper} but g[{j}][{i}] = {lower} at {point:?}"
    )]
    AsymmetricMetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
        point: Vec<f64>,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("nonpositive warping function f{which} = {value} at {point:?}")]
    NonPositiveWarping {
        which: u8,
        value: f64,
        point: Vec<f64>,
    },
    #[error("accepted only {accepted} of {wanted} sample points after {attempts} draws")]
    Sampling {
        accepted: usize,
        wanted: usize,
        attempts: usize,
    },
    #[error("{operation} requires {requirement} (got {found})")]
    Dimension {
        operation: &'static str,
        requirement: &'static str,
        found: String,
    },
    #[error("soliton kind `{kind}` requires field `{field}`")]
    MissingField {
        kind: &'static str,
        field: &'static str,
    },
    #[error("invalid soliton data: {0}")]
    InvalidSoliton(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
