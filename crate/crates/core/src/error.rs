use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("letter {0} is not in the domain")]
    LetterNotInDomain(String),
    #[error("inner codomain does not match outer domain")]
    AlphabetMismatch,
    #[error("elementary morphism needs two distinct letters")]
    SameLetter,
    #[error("morphism is not an endomorphism")]
    NotEndomorphism,
    #[error("no growing letter")]
    NoGrowingLetter,
    #[error("inner morphism is not primitive")]
    NotPrimitive,
    #[error("morphism is not injective on letters")]
    NotInjective,
    #[error("{0:?} is not a factor")]
    NotAFactor(String),
    #[error("derivation failed: {0}")]
    DerivationInconclusive(String),
    #[error("no repeat among {0} derived levels")]
    ChainBudgetExceeded(usize),
    #[error("stabilization revisited an earlier graph")]
    InternalMonotonicityBreach,
    #[error("input triplet is not valid")]
    InvalidInputTriplet,
    #[error("not a covering tree of the target")]
    NotACoveringTree,
    #[error("input shift is not dendric")]
    NotDendricInput,
    #[error("cancelled")]
    Cancelled,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
}
