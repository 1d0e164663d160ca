use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("variable {0} has no assigned value")]
    UnassignedVariable(String),
    #[error("expression contains the formal generator isqrt2 and has no real value")]
    NonReal,
    #[error("density is not a total x-derivative")]
    NotATotalDerivative,
    #[error("metric eta is not constant: {0}")]
    NonConstantMetric(String),
    #[error("metric is degenerate")]
    DegenerateMetric,
    #[error("potential is not quasi-homogeneous: {0}")]
    NotQuasiHomogeneous(String),
    #[error("degenerate Frobenius manifold (d_1 = 0) is not supported")]
    DegenerateManifold,
    #[error("recursion is not integrable: {0}")]
    IntegrabilityFailure(String),
    #[error("transformation is not invertible: {0}")]
    NonInvertible(String),
    #[error("requested order {requested} exceeds available order {available}")]
    TruncationOverflow { requested: u32, available: u32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
