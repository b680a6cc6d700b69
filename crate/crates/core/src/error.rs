//! Crate-wide error type. Every fallible operation reports one of these;
//! the CLI maps them onto exit codes.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring spec: {0}")]
    InvalidSpec(String),
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("ring has no variable {0}")]
    NoSuchVariable(char),
    #[error("element is not divisible by the given divisor")]
    NotDivisible,
    #[error("guaranteed p-precision would drop below 1")]
    PrecisionExhausted,
    #[error("element is not a unit")]
    NotUnit,
    #[error("element is not of rank 1")]
    NotRankOne,
    #[error("element is not distinguished")]
    NotDistinguished,
    #[error("element does not lie in 1 + Nygaard^(>=1)")]
    NotInUnitNygaard,
    #[error("first omitted series term is nonzero in the working ring")]
    TailNotNegligible,
    #[error("root system is not p-power compatible")]
    IncompatibleRoots,
    #[error("operation needs envelope generators beyond depth K")]
    FrontierExceeded,
    #[error("psi matrix is not invertible")]
    NonInvertiblePsi,
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("Breuil-Kisin module is not minuscule (in normal position)")]
    NotMinuscule,
    #[error("no convergence witness: divided Frobenius iterates do not vanish")]
    NoConvergenceWitness,
    #[error("morphism is not injective")]
    NotInjective,
    #[error("morphism does not commute with Frobenius")]
    NotEquivariant,
    #[error("dual Frobenius matrix is not integral")]
    NonIntegralDual,
    #[error("filtration not computable at working precision")]
    FilNotComputable,
    #[error("instance too large for desk-scale enumeration")]
    TooLarge,
    #[error("lift verification failed at working precision")]
    LiftFailed,
    #[error("bad input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
