use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("step range {t0}..{t1} is invalid for a schedule of {steps} layers")]
    StepRange { t0: usize, t1: usize, steps: usize },

    #[error("cycle needs at least 2 sites, got {0}")]
    TooFewSites(usize),

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("POVM completeness violated (max deviation {deviation:.3e})")]
    InvalidPovm { deviation: f64 },

    #[error("state is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("walk with shifts ({delta0}, {delta1}) on {n} sites is not universal; closed subspaces: {orbits:?}")]
    NotUniversal {
        n: usize,
        delta0: i64,
        delta1: i64,
        orbits: Vec<Vec<usize>>,
    },

    #[error("invalid basis pair: {0}")]
    InvalidPair(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value encountered at update {update}: {what}")]
    NonFinite { update: u64, what: &'static str },
}
