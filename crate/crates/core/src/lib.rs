//! Symbolic combinatorics of shrinking wedges.
//!
//! Summand groups are black boxes with normal forms ([`summands`]). Finite
//! free products get eager reduction ([`freeprod`]), transfinite words are
//! closed expressions with exact projections to every finite level
//! ([`transfinite`]), the universal covers of finite wedges are tracked copy
//! by copy together with their tree translates ([`covers`]), and the image
//! predicate for coefficient families lives in [`whisker`].

pub mod cli;
pub mod covers;
pub mod error;
pub mod freeprod;
pub mod summands;
pub mod syntax;
pub mod transfinite;
pub mod whisker;

pub use error::{Error, Result};
pub use freeprod::{FiniteWord, Letter, NtDecomposition};
pub use summands::{Elem, Index, SummandSpec, WedgeConfig};
pub use transfinite::{BlockRule, ElemRecipe, WordExpr};
