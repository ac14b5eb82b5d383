use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid PHY profile: {0}")]
    InvalidProfile(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("attempt probability for {contenders} contenders did not converge (residual {residual:e})")]
    NoConvergence { contenders: usize, residual: f64 },

    #[error("stationary tail mass {tail_mass:e} beyond n_max = {n_max} exceeds 1e-12; raise n_max")]
    Truncation { n_max: usize, tail_mass: f64 },

    #[error("confidence interval needs at least 2 replications, got {0}")]
    TooFewReplications(usize),

    #[error("invalid simulation options: {0}")]
    InvalidSimOptions(String),
}

pub type Result<T> = std::result::Result<T, Error>;
