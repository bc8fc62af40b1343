use thiserror::Error;

/// Errors raised by the risk engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    /// The aggregate drift is nonnegative, so the Lévy exponent has no positive root.
    #[error("no Cramér root: aggregate drift is not negative")]
    NoCramerRoot,

    #[error("infeasible conditioning: {0}")]
    InfeasibleCondition(String),

    #[error("allocation undefined: {0}")]
    UndefinedAllocation(String),

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("no simulated path reached the barrier")]
    ZeroRuinedPaths,

    #[error("no simulated path fell inside the conditioning window")]
    ZeroConditioningPaths,
}

impl RiskError {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, RiskError::InvalidModel(_) | RiskError::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, RiskError>;
