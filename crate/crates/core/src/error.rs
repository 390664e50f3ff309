use thiserror::Error;

/// Errors raised by the scheduler and its models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("transmission rate must be positive, got {0}")]
    InvalidRate(f64),

    #[error("vehicle {vehicle} offloads to the edge with zero allocated resource")]
    ZeroAllocation { vehicle: u32 },

    #[error("vehicle {vehicle} is in the general region but has no RSU selection")]
    MissingSelection { vehicle: u32 },

    #[error("unknown RSU id {0}")]
    UnknownRsu(u32),

    #[error("QoS utility undefined: 1 + epsilon - delay = {0} <= 0")]
    QosDomain(f64),

    #[error("no feasible matching: {rows} vehicles but only {slots} RSU slots")]
    InfeasibleMatching { rows: usize, slots: usize },

    #[error(
        "task of vehicle {vehicle} expires during movement (remaining deadline {remaining:.3} s)"
    )]
    TaskExpired { vehicle: u32, remaining: f64 },

    #[error("minimum resource need {need:.4e} exceeds budget {budget:.4e}")]
    InfeasibleBudget { need: f64, budget: f64 },

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    /// Short machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::InvalidScenario(_) => "invalid-scenario",
            Error::InvalidRate(_) => "invalid-rate",
            Error::ZeroAllocation { .. } => "zero-allocation",
            Error::MissingSelection { .. } => "missing-selection",
            Error::UnknownRsu(_) => "unknown-rsu",
            Error::QosDomain(_) => "qos-domain-violation",
            Error::InfeasibleMatching { .. } => "infeasible-matching",
            Error::TaskExpired { .. } => "task-expired",
            Error::InfeasibleBudget { .. } => "infeasible-budget",
            Error::SizeLimit(_) => "size-limit",
            Error::Io(_) => "io",
            Error::Serde(_) => "serde",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
