//! Modal systems S3-S5 extended with propositional quantifiers and a
//! non-Fregean identity connective.
//!
//! The crate is organised around three views of the same logic:
//!
//! * [`syntax`] / [`subst`] — formulas, a concrete grammar, and capture-free
//!   substitution with a deterministic bound-variable renaming rule;
//! * [`calculus`] / [`transform`] / [`generate`] — a Hilbert-style proof
//!   calculus with witnessed axiom instances, a line checker, and
//!   derivation-to-derivation transformers;
//! * [`prealgebra`] / [`models`] / [`kripke`] — finite algebraic and
//!   relational semantics, with constructions mapping between them.

pub mod syntax;
pub mod subst;
pub mod calculus;
pub mod enumerate;
pub mod kripke;
pub mod transform;
pub mod generate;
pub mod models;
pub mod prealgebra;
pub mod sample;

pub use syntax::{Const, Formula, Var};
pub use subst::Substitution;
