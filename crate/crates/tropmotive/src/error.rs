use thiserror::Error;

#[derive(Debug, Error)]
pub enum TropError {
    #[error("the given vectors do not span a saturated sublattice")]
    NotSaturated,
    #[error("cone is not contained in the reference cone")]
    NotContained,
    #[error("cone is not contained in the nonnegative orthant")]
    NotInOrthant,
    #[error("map does not restrict to a proper map on the nonnegative orthant")]
    NotProper,
    #[error("the factor vectors do not generate a pointed cone")]
    NotPointed,
    #[error("nerve is not closed under subsets: missing {0:?}")]
    NerveNotClosed(Vec<String>),
    #[error("precondition violated by cone {0}")]
    PreconditionViolated(String),
    #[error("a stored series key has negative coordinate on the chosen axis")]
    NegativeAxisExponent,
    #[error("product of two stratum symbols is not defined in this coefficient module")]
    SymbolProduct,
    #[error("series with different truncation gradings cannot be combined")]
    GradingMismatch,
    #[error("model validation failed: {0}")]
    ValidationFailed(String),
    #[error("missing stratum class for nerve face {0:?}")]
    MissingStratumClass(Vec<String>),
    #[error("fan completion did not reach a verified complete fan")]
    CompletionFailed,
    #[error("malformed input: {0}")]
    Malformed(String),
}
