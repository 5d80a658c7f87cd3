use thiserror::Error;

/// Crate-wide error type. Contract violations (wrong representation, grid
/// mismatch, invalid parameters) are reported here rather than panicking so
/// the CLI can map them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field is {got} but the operation requires {expected} form")]
    WrongRepresentation {
        expected: &'static str,
        got: &'static str,
    },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("operands have mismatched representations")]
    ReprMismatch,

    #[error("{op} requires a mean-zero field (zero-mode magnitude {mean:.3e})")]
    NonZeroMean { op: &'static str, mean: f64 },

    #[error("{op} requires a divergence-free velocity (residual {residual:.3e})")]
    NotDivergenceFree { op: &'static str, residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time step {dt:.6e} violates the CFL bound; admissible dt is {admissible:.6e}")]
    CflViolation { dt: f64, admissible: f64 },

    #[error("solution blew up (NaN/Inf) after t = {t_last_valid}")]
    BlowUp { t_last_valid: f64 },

    #[error("time samples are not uniformly spaced (needed for trapezoid integrals)")]
    NonUniformTimes,

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
