//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at position {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("chart mismatch: `{left}` vs `{right}`")]
    ChartMismatch { left: String, right: String },
    #[error("missing coordinate `{0}` in point")]
    MissingCoordinate(String),
    #[error("division by zero while evaluating at a point")]
    DivisionByZero,
    #[error("exact evaluation requested on a transcendental expression")]
    TranscendentalExact,
    #[error("numeric evaluation produced a non-finite value")]
    NonFinite,
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("exponent out of range")]
    ExponentRange,
    #[error("invalid degree: {0}")]
    InvalidDegree(String),
    #[error("degree overflow: {0}")]
    DegreeOverflow(String),
    #[error("sample point is singular for the given coefficients")]
    SingularPoint,
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subspace is not maximal isotropic")]
    NotMaximalIsotropic,
    #[error("invalid complement choice: {0}")]
    InvalidComplement(String),
    #[error("structure is not coupling with the foliation: {0}")]
    NotCoupling(String),
    #[error("leaf condition failed: {0}")]
    LeafCondition(String),
    #[error("submanifold is not properly normalized: {0}")]
    NotProperlyNormalized(String),
    #[error("section is not admissible along the submanifold: {0}")]
    NotAdmissible(String),
    #[error("metric is degenerate at a sample point")]
    DegenerateMetric,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
