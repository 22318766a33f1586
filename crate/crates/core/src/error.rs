use thiserror::Error;

/// Errors shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bar ({birth}, {death}]: {reason}")]
    InvalidBar {
        birth: f64,
        death: f64,
        reason: &'static str,
    },

    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rank query needs s <= t, got s={s}, t={t}")]
    RankArgumentOrder { s: f64, t: f64 },

    #[error("reparametrization is not strictly monotone increasing")]
    NonMonotoneReparametrization,

    #[error("reparametrized birth {0} falls below the lower bound 0")]
    NegativeBirth(f64),

    #[error("malformed filtered complex: {0}")]
    InvalidComplex(String),

    #[error("invalid evaluation schedule: {0}")]
    InvalidSchedule(String),

    #[error("estimate decreased from {from} to {to} as epsilon shrank; grid data is inconsistent")]
    EpsMonotonicityViolation { from: f64, to: f64 },

    #[error("profile certification failed: {0}")]
    Certification(String),

    #[error("argument {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    #[error("invalid flow model: {0}")]
    InvalidFlow(String),

    #[error("pseudo-orbit rejected: {0}")]
    InvalidPseudoOrbit(String),

    #[error("shadowing failed: {0}")]
    ShadowingFailed(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("cannot serialize non-finite float {0}")]
    NonFiniteJson(f64),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
