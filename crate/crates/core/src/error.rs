use std::path::PathBuf;

/// Errors raised by the numerical routines and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{n} is not coprime to the modulus {q}")]
    NotCoprime { n: u64, q: u64 },

    #[error("the principal character is not allowed here")]
    PrincipalCharacter,

    #[error("s = {re}{im:+}i lies within the excluded window around the pole at 1")]
    PoleProximity { re: f64, im: f64 },

    #[error("u = {0} lies within the excluded window around 0")]
    SingularityWindow(f64),

    #[error("branch continuity check failed at u = {0}")]
    BranchAmbiguity(f64),

    #[error("tolerance {target:e} not reached (achieved {achieved:e})")]
    ToleranceNotReached { achieved: f64, target: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} above {target:e}")]
    QuadratureNotConverged { estimate: f64, target: f64 },

    #[error("prime factor {prime} exceeds the assignment cutoff {cutoff}")]
    PrimeAboveCutoff { prime: u64, cutoff: u64 },

    #[error("Fourier cache holds {available} entries but {needed} are required")]
    CacheTooShort { needed: u64, available: u64 },

    #[error("weight envelope is not summable over smooth numbers (exponent {0})")]
    NonSummable(f64),

    #[error("infeasible input: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
