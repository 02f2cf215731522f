//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree sequence has odd stub sum {0}")]
    OddStubSum(u64),
    #[error("degree sequence has no stubs")]
    NoStubs,
    #[error("factorial moment order must be >= 1")]
    ZeroMomentOrder,
    #[error("pgf derivative order {0} not supported (max 3)")]
    PgfOrder(u8),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("r-regular distribution requires r >= 3, got {0}")]
    RegularDegreeTooSmall(u32),
    #[error("evaluation point {0} outside [0, 1]")]
    PgfArgument(f64),
    #[error("no simple graph found in {attempts} attempts")]
    SimplicityExhausted { attempts: u32 },
    #[error("exploration step limit {limit} exceeds vertex count {n}")]
    StepLimit { limit: usize, n: usize },
    #[error("survival fixed point did not converge")]
    FixedPointDiverged,
    #[error("sequence is not supercritical (epsilon = {0})")]
    NotSupercritical(f64),
    #[error("sequence is not subcritical (epsilon = {0})")]
    NotSubcritical(f64),
    #[error("trajectory time {0} outside [0, {1}]")]
    TauOutOfRange(f64, f64),
    #[error("tilt undefined: distribution support is one-sided")]
    TiltUndefined,
    #[error("lattice span > 1; local limit formula invalid")]
    LatticeSpan,
    #[error("invalid lattice distribution: {0}")]
    InvalidLattice(String),
    #[error("convolution guard exceeded: t * k = {0} > 1e6")]
    ConvolutionGuard(u64),
    #[error("hitting-time walk must have increments >= -1")]
    HittingSupport,
    #[error("hitting-time tail requires negative mean, got {0}")]
    HittingDrift(f64),
    #[error("no phase transition: eta - 2 has no positive support")]
    NoPositiveSupport,
    #[error("third moment vanishes; critical limit parameters undefined")]
    DegenerateLimit,
    #[error("invalid limit parameters: {0}")]
    InvalidLimitParams(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("regime mismatch: {0} (pass force=true to override)")]
    RegimeMismatch(String),
    #[error("report contains no replicas")]
    EmptyReport,
    #[error("subcritical window parameter too small: Lambda = {0} < 3")]
    WindowTooSmall(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
