//! Symbolic engine for Z-graded q-differential algebras.
//!
//! Scalars are exact elements of cyclotomic fields ([`cyclotomic`]). Algebra
//! elements are linear combinations of words over graded generators and are
//! brought to canonical form by an oriented rewrite system ([`galgebra`]).
//! On top of that sit the q-Leibniz differential ([`differential`]), the
//! anyonic tensor product ([`tensor`]), the exhaustive search over tensor
//! product differentials ([`nogo`]) and the shipped `N = 3` calculi on the
//! line and the plane ([`calculi`]).

pub mod calculi;
pub mod cyclotomic;
pub mod differential;
pub mod error;
pub mod galgebra;
pub mod nogo;
pub mod render;
pub mod sampling;
pub mod tensor;

pub use cyclotomic::{CycNum, IntPoly, RootExponent};
pub use error::{Error, Result};
pub use galgebra::{Element, Generator, GeneratorKind, RewriteRule, RuleSet, Signature, Word};
