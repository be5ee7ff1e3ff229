use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("impossible table case: {0}")]
    ImpossibleCase(String),

    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),

    #[error("scaling relation violated: {0}")]
    ScalingRelation(String),

    #[error("representation mismatch: expected {expected}, found {found}")]
    RepresentationMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("grid mismatch")]
    GridMismatch,

    #[error("unresolvable on grid: {0}")]
    Unresolvable(String),

    #[error("resolution guard violated: {0}")]
    Guard(String),

    #[error("Picard iteration failed to contract after {iterations} iterations (last factor {last_factor:.3e}); try a shorter horizon or smaller data")]
    NonContraction { iterations: usize, last_factor: f64 },

    #[error("unconverged solution")]
    Unconverged,

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
