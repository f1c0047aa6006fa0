use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
///
/// Variants split into precondition violations (bad input) and numerical
/// failures (the input is well formed but the requested object does not
/// exist or could not be resolved). [`Error::is_precondition`] tells them
/// apart; the CLI maps them to distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} must be even and at least 16")]
    InvalidGrid(usize),
    #[error("grid sizes differ: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("expected {expected} function, got {got}")]
    ParityMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("derivative order {0} outside 1..=3")]
    InvalidOrder(u32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("angle function is not increasing (min phi' = {0:.3e})")]
    NonMonotone(f64),
    #[error("homogeneous multiplier {0:.3e} is within tolerance of 1")]
    Resonant(f64),
    #[error("monodromy trace {0:.12} is not hyperbolic")]
    NoRealFixedPoints(f64),
    #[error("periodic branch has a pole: {0}")]
    BranchSingular(String),
    #[error("curves coincide at t = {0}")]
    Degenerate(f64),
    #[error("Backlund parameter must be nonzero")]
    ZeroParam,
    #[error("projective parameter {0} must be positive")]
    NegativeProjective(f64),
    #[error("no branch matches the predicted fixed point (closest miss {0:.3e})")]
    MatchFailure(f64),
    #[error("cross-ratio points degenerate: {0}")]
    DegeneratePoints(String),
    #[error("time step unstable at s = {0}")]
    StepUnstable(f64),
    #[error("branch tracking lost continuity at s = {0}")]
    BranchJump(f64),
    #[error("solution winds {0} half-turns per period instead of 1")]
    RotationNumber(i64),
}

impl Error {
    /// Variant name, used verbatim in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::GridMismatch(..) => "GridMismatch",
            Error::ParityMismatch { .. } => "ParityMismatch",
            Error::InvalidOrder(_) => "InvalidOrder",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NonMonotone(_) => "NonMonotone",
            Error::Resonant(_) => "Resonant",
            Error::NoRealFixedPoints(_) => "NoRealFixedPoints",
            Error::BranchSingular(_) => "BranchSingular",
            Error::Degenerate(_) => "Degenerate",
            Error::ZeroParam => "ZeroParam",
            Error::NegativeProjective(_) => "NegativeProjective",
            Error::MatchFailure(_) => "MatchFailure",
            Error::DegeneratePoints(_) => "DegeneratePoints",
            Error::StepUnstable(_) => "StepUnstable",
            Error::BranchJump(_) => "BranchJump",
            Error::RotationNumber(_) => "RotationNumber",
        }
    }

    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::GridMismatch(..)
                | Error::ParityMismatch { .. }
                | Error::InvalidOrder(_)
                | Error::InvalidArgument(_)
                | Error::NonMonotone(_)
                | Error::ZeroParam
                | Error::NegativeProjective(_)
                | Error::DegeneratePoints(_)
                | Error::Degenerate(_)
        )
    }
}
