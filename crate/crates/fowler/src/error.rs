use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library, with a stable machine-readable code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension n must be at least 5 (got {0})")]
    DimensionTooSmall(u32),
    #[error("component count p must be at least 1 (got {0})")]
    InvalidComponentCount(usize),
    #[error("radial grid points must be strictly positive")]
    NonPositiveRadius,
    #[error("malformed grid: {0}")]
    InvalidGrid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("finite-difference stencil at r = {r} with h = {h} leaves r > 0")]
    StencilOutOfDomain { r: f64, h: f64 },
    #[error("radii must satisfy 0 < r1 < probes < r2")]
    BadOrdering,
    #[error("non-finite state encountered at t = {0}")]
    NonFiniteState(f64),
    #[error("adaptive step size fell below 1e-14 at t = {0}")]
    StepSizeUnderflow(f64),
    #[error("trajectory has no states")]
    EmptyTrajectory,
    #[error("component {component} is not strictly positive at t = {t}")]
    NonPositiveComponent { component: usize, t: f64 },
    #[error("necksize a = {a} lies outside (0, a0] with a0 = {a0}")]
    NecksizeOutOfRange { a: f64, a0: f64 },
    #[error("no Diverged/HitZero bracket found scanning b in [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },
    #[error("the constant orbit a = a0 has no fundamental period")]
    DegenerateOrbit,
    #[error("no return to the anchor section detected before t = {0}")]
    NoReturnDetected(f64),
    #[error("radial grid spans {got:.3} decades, need at least {need}")]
    InsufficientSpan { got: f64, need: f64 },
    #[error("noisy data: {0}")]
    NoisyData(String),
}

impl Error {
    /// Stable identifier for scripting against the CLI (`ERROR <CODE>: ...`).
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionTooSmall(_) => "DIMENSION_TOO_SMALL",
            Error::InvalidComponentCount(_) => "INVALID_COMPONENT_COUNT",
            Error::NonPositiveRadius => "NON_POSITIVE_RADIUS",
            Error::InvalidGrid(_) => "INVALID_GRID",
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::StencilOutOfDomain { .. } => "STENCIL_OUT_OF_DOMAIN",
            Error::BadOrdering => "BAD_ORDERING",
            Error::NonFiniteState(_) => "NON_FINITE_STATE",
            Error::StepSizeUnderflow(_) => "STEP_SIZE_UNDERFLOW",
            Error::EmptyTrajectory => "EMPTY_TRAJECTORY",
            Error::NonPositiveComponent { .. } => "NON_POSITIVE_COMPONENT",
            Error::NecksizeOutOfRange { .. } => "NECKSIZE_OUT_OF_RANGE",
            Error::BracketNotFound { .. } => "BRACKET_NOT_FOUND",
            Error::DegenerateOrbit => "DEGENERATE_ORBIT",
            Error::NoReturnDetected(_) => "NO_RETURN_DETECTED",
            Error::InsufficientSpan { .. } => "INSUFFICIENT_SPAN",
            Error::NoisyData(_) => "NOISY_DATA",
        }
    }

    /// True for precondition/validation failures (CLI exit code 2);
    /// the rest are numerical/internal failures (exit code 1).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::DimensionTooSmall(_)
                | Error::InvalidComponentCount(_)
                | Error::NonPositiveRadius
                | Error::InvalidGrid(_)
                | Error::InvalidInput(_)
                | Error::BadOrdering
                | Error::NecksizeOutOfRange { .. }
                | Error::InsufficientSpan { .. }
        )
    }
}
