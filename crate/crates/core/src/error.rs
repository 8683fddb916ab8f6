use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Format(String),
    #[error("vertex {vertex} is a sink; the shift is not surjective")]
    Sink { vertex: String },
    #[error("graph has no cycle; spectral radius is 0")]
    NoCycle,
    #[error("beta = {beta} is not above the critical value {beta_c}")]
    SubcriticalTemperature { beta: f64, beta_c: f64 },
    #[error("path enumeration exceeded the cap of {cap}")]
    TooManyPaths { cap: usize },
    #[error("invalid path word: {0}")]
    InvalidWord(String),
    #[error("cylinder depth {needed} requested but only depth {available} is resolved")]
    Resolution { needed: usize, available: usize },
    #[error("no admissible split: mass {mass} sits on a word that has no extensions")]
    NoAdmissibleSplit { mass: f64 },
    #[error("measure has zero mass")]
    ZeroMeasure,
    #[error("element is not gauge-homogeneous")]
    NotHomogeneous,
    #[error("function has a negative coefficient")]
    NegativeCoefficient,
    #[error("level dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("no vertex has column sums dominating rho^N for all N <= {n_max}")]
    NoCriticalVertex { n_max: u32 },
    #[error("no tail constants found up to N = {n_max}")]
    TailBoundUnavailable { n_max: u32 },
    #[error("linear system is singular")]
    Singular,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
