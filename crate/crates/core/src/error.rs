use thiserror::Error;

/// Errors surfaced by the algebra operations.
///
/// Domain-negative answers (a query that is well posed but false) are plain
/// `false`/`None` returns, not errors; these variants are for inputs that
/// break a precondition or leave the representable domain.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("the unit parameter must be nonzero")]
    ZeroUnit,
    #[error("the defining polynomial must be nonzero")]
    ZeroDefiningPoly,
    #[error("operation requires deg(h) >= 1, got a constant")]
    DegreeTooSmall,
    #[error(
        "operation requires h monic with zero coefficient in degree deg(h)-1; normalize first"
    )]
    NotNormalized,
    #[error("not an automorphism of A_h: h(ax) != a^N h(x)")]
    InvalidAutomorphism,
    #[error("invalid special polynomial: {0}")]
    InvalidSpecialPoly(String),
    #[error("element does not restrict to the base algebra: {0}")]
    NotStable(String),
    #[error("element does not decompose: {0}")]
    NotDecomposable(String),
    #[error("the given images do not extend to a derivation")]
    NotADerivation,
    #[error("gcd of two zero polynomials is undefined")]
    GcdOfZero,
    #[error("enumeration bounds exceeded: {0}")]
    BoundsExceeded(String),
    #[error("symbolic value where a concrete unit is required")]
    SymbolicUnit,
}

pub type Result<T> = std::result::Result<T, Error>;
