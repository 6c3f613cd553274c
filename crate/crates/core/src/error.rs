use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `(4/N²)⟨J²⟩ − 2/N` vanished or went negative.
    #[error("degenerate squeezing denominator ({0:e})")]
    DegenerateDenominator(f64),

    #[error("no crossing found: {0}")]
    NoCrossing(String),

    #[error("quantity is not positive at zero decoherence")]
    NotInitiallyPositive,

    #[error("non-physical state: {0}")]
    NonPhysical(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("site index out of range: {0}")]
    Index(String),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("trace never becomes positive: {0}")]
    AllZeroTrace(String),

    #[error("matrix is not symmetric: {0}")]
    Asymmetric(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
