use thiserror::Error;

/// Every failure the library reports. Variant names double as the error
/// names printed by the CLI.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid Lie algebra: {0}")]
    InvalidAlgebra(String),
    #[error("element is not in the torus subalgebra (residual {0:e})")]
    NotInTorus(f64),
    #[error("metric is not positive definite at {0:?}")]
    MetricDegenerate(Vec<f64>),
    #[error("point left the chart: {0:?}")]
    LeftChart(Vec<f64>),
    #[error("geodesic step-doubling estimate {0:e} exceeds tolerance")]
    GeoTolerance(f64),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("locked inertia tensor is singular at {0:?}")]
    SymmetricPoint(Vec<f64>),
    #[error("isotropy algebra at q_e is not contained in the torus (residual {0:e})")]
    IsotropyNotInTorus(f64),
    #[error("direction lies in Z_mu (|det A| = {0:e})")]
    InZMu(f64),
    #[error("locked inertia tensor could not be inverted at tau = {0}")]
    SingularInertia(f64),
    #[error("direction does not have trivial isotropy")]
    TrivialIsotropyFailed,
    #[error("direction is not orthogonal to the orbit g.q_e (residual {0:e})")]
    NotInSlice(f64),
    #[error("family data invalid: {0}")]
    InvalidFamily(String),
    #[error("Newton iteration diverged: {0}")]
    NewtonDiverged(String),
    #[error("Delta matrix is degenerate (|det| = {0:e})")]
    DeltaDegenerate(f64),
    #[error("continuation step failed at tau = {0}")]
    StepFailed(f64),
    #[error("operation requires an abelian symmetry group")]
    NonAbelian,
    #[error("unknown catalog system `{0}`")]
    UnknownSystem(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
}

impl Error {
    /// Stable short name of the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidAlgebra(_) => "InvalidAlgebra",
            Error::NotInTorus(_) => "NotInTorus",
            Error::MetricDegenerate(_) => "MetricDegenerate",
            Error::LeftChart(_) => "LeftChart",
            Error::GeoTolerance(_) => "GeoTolerance",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidSystem(_) => "InvalidSystem",
            Error::SymmetricPoint(_) => "SymmetricPoint",
            Error::IsotropyNotInTorus(_) => "IsotropyNotInTorus",
            Error::InZMu(_) => "InZMu",
            Error::SingularInertia(_) => "SingularInertia",
            Error::TrivialIsotropyFailed => "TrivialIsotropyFailed",
            Error::NotInSlice(_) => "NotInSlice",
            Error::InvalidFamily(_) => "InvalidFamily",
            Error::NewtonDiverged(_) => "NewtonDiverged",
            Error::DeltaDegenerate(_) => "DeltaDegenerate",
            Error::StepFailed(_) => "StepFailed",
            Error::NonAbelian => "NonAbelian",
            Error::UnknownSystem(_) => "UnknownSystem",
            Error::BadParams(_) => "BadParams",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
