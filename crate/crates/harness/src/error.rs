use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Anything wrong with the configuration file or CLI/config mismatch;
    /// the message carries the offending key path.
    #[error("config error: {0}")]
    Config(String),
    /// A quantitative gate requested by the config failed; for CI use.
    #[error("threshold failure: {0}")]
    Threshold(String),
    #[error(transparent)]
    Core(#[from] oldroyd_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("summary serialization: {0}")]
    Toml(#[from] toml::ser::Error),
    #[error("{0}")]
    Other(String),
}

impl HarnessError {
    /// Process exit code contract: 0 success, 2 a run that could not
    /// continue (blow-up, or a step size the transport bound rejects),
    /// 3 config error, 4 threshold failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use oldroyd_core::Error as Core;
        match self {
            HarnessError::Config(_) => 3,
            HarnessError::Threshold(_) => 4,
            HarnessError::Core(Core::BlowUp { .. } | Core::CflViolation { .. }) => 2,
            _ => 1,
        }
    }
}
