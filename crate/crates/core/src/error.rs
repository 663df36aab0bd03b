use thiserror::Error;

use crate::channels::ChannelKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ensemble needs at least two spins, got {0}")]
    TooFewSpins(usize),
    #[error("twist angle must be finite, got {0}")]
    NonFiniteTheta(f64),
    #[error("decoherence strength p must lie in [0, 1], got {0}")]
    StrengthOutOfRange(f64),
    #[error("measurement strength {name} must be positive and finite, got {value}")]
    NonPositiveStrength { name: &'static str, value: f64 },
    #[error("damping rate and time must be nonnegative (gamma = {gamma}, t = {t})")]
    NegativeTime { gamma: f64, t: f64 },
    #[error("{kind:?}: no real reversal strength satisfies the constraint (m^2 = {m_sq} < p = {p})")]
    InfeasibleConstraint { kind: ChannelKind, m_sq: f64, p: f64 },
    #[error("{kind:?}: strengths violate the channel constraint ({detail})")]
    ConstraintViolated { kind: ChannelKind, detail: String },
    #[error("dual-map normalization is not positive ({0})")]
    NonPositiveNorm(f64),
    #[error("state is not normalized (squared norm {0})")]
    Unnormalized(f64),
    #[error("implied two-qubit state is not positive semidefinite (min eigenvalue {0})")]
    NotPositive(f64),
    #[error("post-selection never succeeds (success weight {0})")]
    ZeroProbability(f64),
    #[error("weight operator is not diagonal (off-diagonal magnitude {0})")]
    NonDiagonalWeight(f64),
    #[error("{path} oracle supports at most {max} spins, got {n}")]
    TooManySpins { path: &'static str, max: usize, n: usize },
    #[error("mean spin vanishes; squeezing direction undefined")]
    ZeroMeanSpin,
    #[error("quantity is not positive at p = 0 ({0})")]
    NotSqueezedInitially(f64),
    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid p grid: {0}")]
    InvalidGrid(String),
    #[error("asymptotic report is only defined for large-m amplitude damping and small-m phase damping, not {0:?}")]
    UnsupportedLimit(ChannelKind),
    #[error("cannot parse `{0}` as an angle (expected radians or `<x>pi`)")]
    BadAngle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
