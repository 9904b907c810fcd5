//! Gödel's System T with fair binary choice, a geometric sampler `rand`, a
//! probabilistic fixpoint `fixr`, and the register-bounded `srand`.
//!
//! Terms are evaluated exactly: distributions carry rational weights and an
//! explicit unresolved mass. The [`transforms`] module contains the
//! source-to-source encodings between fragments, a lifting of the
//! choice fragment into plain System T, finite representations, uniform
//! approximants, and derandomizers.

pub mod dist;
pub mod eval;
pub mod multistep;
pub mod prob;
pub mod srand;
pub mod syntax;
pub mod transforms;
