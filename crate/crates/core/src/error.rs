use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },

    #[error("modulus {0} is outside the supported range 1..={max}", max = crate::cyclotomic::MAX_MODULUS)]
    UnsupportedModulus(u32),

    #[error("element is not invertible")]
    NotInvertible,

    #[error("exponent {exponent} is not a unit modulo {modulus}")]
    NotAUnit { exponent: u32, modulus: u32 },

    #[error("invalid q-binomial arguments: k = {k} > n = {n}")]
    BinomialRange { n: u32, k: u32 },

    #[error("root exponent {k} of order {order} is not primitive for modulus {modulus}")]
    NotPrimitive { modulus: u32, k: u32, order: u32 },

    #[error("invalid generator `{name}`: {reason}")]
    InvalidGenerator { name: String, reason: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("rule `{rule}` is not grade-homogeneous: lhs grade {lhs}, rhs term grade {rhs}")]
    MisgradedRule { rule: String, lhs: u32, rhs: u32 },

    #[error("malformed rule `{rule}`: {reason}")]
    MalformedRule { rule: String, reason: String },

    #[error("rewriting did not terminate within {fuel} rule applications at term {term}")]
    NonTerminating { fuel: usize, term: String },

    #[error("the derivative of `{0}` is not tracked by this signature")]
    UntrackedDerivative(String),

    #[error("d-action on `{name}` must raise grade {grade} by one, found a term of grade {found}")]
    BadAction { name: String, grade: u32, found: u32 },

    #[error("missing d-action entry for `{0}`")]
    MissingAction(String),

    #[error("star table has no entry for `{0}`")]
    MissingStar(String),

    #[error("tensor context mismatch")]
    ContextMismatch,

    #[error("derivation failed at step `{step}`: residual {residual}")]
    Derivation { step: String, residual: String },
}

pub type Result<T> = std::result::Result<T, Error>;
