use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the constructions and numerical checks.
///
/// Everything except [`Error::NoConvergence`] is a violated precondition of
/// the operation that produced it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no closed-form p-harmonic profile for this combination: {0}")]
    UnsupportedCombination(String),

    #[error("closed-form profiles are only catalogued for the Lebesgue measure")]
    NonLebesgueMeasure,

    #[error("profile is not p-harmonic: relative residual {residual:.3e} at r = {r}")]
    NotPHarmonic { r: f64, residual: f64 },

    #[error("profile is not positive at r = {r}")]
    NonPositiveProfile { r: f64 },

    #[error("wrong end classification: expected {expected}, found {found}")]
    WrongClassification { expected: String, found: String },

    #[error("gamma = {given} does not match the inner end limit {actual} of the profile")]
    GammaMismatch { given: f64, actual: f64 },

    #[error("alpha out of range: {0}")]
    AlphaOutOfRange(String),

    #[error("end limits do not match the profile: {0}")]
    EndLimitMismatch(String),

    #[error("derivative vanishes at r = {r}")]
    VanishingDerivative { r: f64 },

    #[error("sign condition violated at r = {r}: {reason}")]
    SignConditionViolated { r: f64, reason: String },

    #[error("a second derivative is required but was not provided")]
    MissingSecondDerivative,

    #[error("f' vanishes at s = {s} inside the range of u")]
    DerivativeVanishes { s: f64 },

    #[error("level {t} is outside the open range ({lo}, {hi}) of the profile")]
    LevelOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("integrand support [{lo}, {hi}] is not compactly contained in ({inf}, {sup})")]
    SupportNotCompact { lo: f64, hi: f64, inf: f64, sup: f64 },

    #[error("non-finite integrand near r = {r}")]
    NonFiniteIntegrand { r: f64 },

    #[error("negative nodal value {value} at node {index}")]
    NegativeNodalValue { index: usize, value: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("weight integral vanishes on the window")]
    ZeroDenominator,

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("grid cannot cover the required support: {0}")]
    GridTooNarrow(String),

    #[error("superharmonicity fails at r = {r}: {reason}")]
    SuperharmonicityFails { r: f64, reason: String },
}

impl Error {
    /// True for numerical non-convergence, false for violated preconditions.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}
