use thiserror::Error;

/// Errors raised by the scattering pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IstError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("potential is not admissible: edge magnitude {edge:.3e} exceeds {tol:.3e}")]
    Inadmissible { edge: f64, tol: f64 },

    #[error("non-finite value in Jost integration at lambda = {lambda}")]
    NonFinite { lambda: f64 },

    #[error("alpha nearly vanishes: min |alpha| = {min_abs:.3e} at lambda = {lambda}")]
    AlphaVanishes { lambda: f64, min_abs: f64 },

    #[error("spectral condition violated at lambda = {lambda}: {what} = {value:.6e}")]
    SpectralConditionViolated {
        lambda: f64,
        what: &'static str,
        value: f64,
    },

    #[error("Krylov solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dense system is singular")]
    SingularSystem,

    #[error("reconstruction failed at x = {x}: {source}")]
    AtPoint {
        x: f64,
        #[source]
        source: Box<IstError>,
    },

    #[error("blow-up detected at t = {t}: sup|q| = {sup:.3e}")]
    BlowupDetected { t: f64, sup: f64 },

    #[error("glue coverage gap: {0}")]
    CoverageGap(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl IstError {
    /// Whether this error stems from the data (spectral conditions, admissibility)
    /// rather than from a solver failing to converge.
    pub fn is_data_error(&self) -> bool {
        match self {
            IstError::AtPoint { source, .. } => source.is_data_error(),
            IstError::NoConvergence { .. }
            | IstError::SingularSystem
            | IstError::NonFinite { .. }
            | IstError::BlowupDetected { .. } => false,
            _ => true,
        }
    }
}

impl From<std::io::Error> for IstError {
    fn from(e: std::io::Error) -> Self {
        IstError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, IstError>;
