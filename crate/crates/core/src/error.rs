use thiserror::Error;

/// Errors produced by the numerics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generating function is not increasing at x = {x} (slope {slope})")]
    NonMonotone { x: f64, slope: f64 },

    #[error("Moebius pole at x = {pole} lies inside the domain")]
    PoleInDomain { pole: f64 },

    #[error("inadmissible shock: E_n * l = {product} must stay below hbar/(12 pi) = {limit}")]
    InadmissibleShock { product: f64, limit: f64 },

    #[error("x = {x} is a declared kink; pointwise flux is distributional there")]
    KinkEvaluation { x: f64 },

    #[error("x = {x} lies outside the domain [{lo}, {hi})")]
    DomainViolation { x: f64, lo: f64, hi: f64 },

    #[error("adaptive quadrature did not reach tolerance on [{lo}, {hi}]: estimate {estimate}, error {error}")]
    QuadratureFailure {
        lo: f64,
        hi: f64,
        estimate: f64,
        error: f64,
    },

    #[error("wavepacket truncation failed: {0}")]
    TruncationFailure(String),

    #[error("two-point function needs distinct points (got x1 = x2 = {x})")]
    CoincidentPoints { x: f64 },

    #[error("point-splitting extrapolation diverged (successive estimates {estimates:?})")]
    ExtrapolationDivergence { estimates: Vec<f64> },

    #[error("scenario ordering violated: {0}")]
    ScenarioOrderViolation(String),

    #[error("optimizer stalled; best energy {best_energy} with constraint residual {residual}")]
    OptimizerStall {
        best_energy: f64,
        residual: f64,
        params: Vec<f64>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("segment form `{0}` has no serialized representation")]
    NotSerializable(&'static str),

    #[error("malformed generating-function document: {0}")]
    Malformed(String),
}

impl Error {
    /// Short machine-readable tag, used in run records and reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonMonotone { .. } => "NonMonotone",
            Error::PoleInDomain { .. } => "PoleInDomain",
            Error::InadmissibleShock { .. } => "InadmissibleShock",
            Error::KinkEvaluation { .. } => "KinkEvaluation",
            Error::DomainViolation { .. } => "DomainViolation",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::TruncationFailure(_) => "TruncationFailure",
            Error::CoincidentPoints { .. } => "CoincidentPoints",
            Error::ExtrapolationDivergence { .. } => "ExtrapolationDivergence",
            Error::ScenarioOrderViolation(_) => "ScenarioOrderViolation",
            Error::OptimizerStall { .. } => "OptimizerStall",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::NotSerializable(_) => "NotSerializable",
            Error::Malformed(_) => "Malformed",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
