use thiserror::Error;

pub type Result<T> = std::result::Result<T, KpError>;

#[derive(Debug, Error)]
pub enum KpError {
    #[error("singular coordinate: {0}")]
    SingularCoordinate(&'static str),
    #[error("spectral parameter on the real axis (λ_I = 0)")]
    RealAxisUndefined,
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("field shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no contraction: residual ratio {ratio:.3e} after {iterations} iterations")]
    NoContraction { ratio: f64, iterations: usize },
    #[error("maximum iterations ({max_iter}) exceeded, residual {residual:.3e}")]
    MaxIterExceeded { max_iter: usize, residual: f64 },
    #[error("finite-difference step too large: Richardson disagreement {0:.3e}")]
    StepTooLarge(f64),
    #[error("invalid cone point: x₃ = {0} must be negative")]
    InvalidCone(f64),
    #[error("degenerate phase: a = 0 has no isolated stationary points")]
    DegeneratePhase,
    #[error("degenerate stationary point: vanishing second derivative")]
    DegenerateStationaryPoint,
    #[error("point lies in the near-zero regime |a| = {a:.3e} <= threshold {threshold}")]
    OutsideAsymptoticRegime { a: f64, threshold: f64 },
    #[error("quadrature resolution insufficient: refinement difference {diff:.3e} vs value {value:.3e}")]
    ResolutionInsufficient { diff: f64, value: f64 },
    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),
    #[error("inner integral did not converge: {0}")]
    InnerIntegralNonConvergent(String),
    #[error("time step violates the linear resolution bound: dt*max|Omega| = {0:.3e}")]
    CflViolation(f64),
    #[error("blow-up: max|u| grew from {initial:.3e} to {current:.3e}")]
    BlowUp { initial: f64, current: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl KpError {
    /// Numeric failures map to CLI exit code 3; configuration to 2; I/O and format to 4.
    pub fn exit_code(&self) -> i32 {
        match self {
            KpError::Config(_) | KpError::InvalidArgument(_) | KpError::InvalidLattice(_) => 2,
            KpError::Io(_) | KpError::Format(_) | KpError::ShapeMismatch(_) => 4,
            _ => 3,
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            KpError::SingularCoordinate(_) => "SingularCoordinate",
            KpError::RealAxisUndefined => "RealAxisUndefined",
            KpError::InvalidLattice(_) => "InvalidLattice",
            KpError::ShapeMismatch(_) => "ShapeMismatch",
            KpError::NoContraction { .. } => "NoContraction",
            KpError::MaxIterExceeded { .. } => "MaxIterExceeded",
            KpError::StepTooLarge(_) => "StepTooLarge",
            KpError::InvalidCone(_) => "InvalidCone",
            KpError::DegeneratePhase => "DegeneratePhase",
            KpError::DegenerateStationaryPoint => "DegenerateStationaryPoint",
            KpError::OutsideAsymptoticRegime { .. } => "OutsideAsymptoticRegime",
            KpError::ResolutionInsufficient { .. } => "ResolutionInsufficient",
            KpError::InsufficientData(_) => "InsufficientData",
            KpError::InnerIntegralNonConvergent(_) => "InnerIntegralNonConvergent",
            KpError::CflViolation(_) => "CFLViolation",
            KpError::BlowUp { .. } => "BlowUp",
            KpError::InvalidArgument(_) => "InvalidArgument",
            KpError::Config(_) => "Config",
            KpError::Format(_) => "Format",
            KpError::Io(_) => "Io",
        }
    }
}
