//! Invariant means of mean-type mappings.
//!
//! A mean-type mapping `M = (M₁, …, M_p)` sends a vector to a vector of
//! means of it. Under a contraction condition its iterates converge to the
//! diagonal, and the limit defines the unique mean `K` with `K ∘ M = K`
//! ([`invariance`]). Given such a `K`, any group `S` of coordinates can be
//! replaced by a single mean that keeps `K` invariant ([`complementary`]);
//! repeating that step generates a family of mappings whose structure is
//! exact for the family `H_{p,α}` ([`hfamily`]). [`funceq`] verifies the
//! solutions `F = φ ∘ K` of `F ∘ M = F`.

pub mod checks;
pub mod cli;
pub mod complementary;
pub mod domain;
pub mod error;
pub mod expr;
pub mod funceq;
pub mod hfamily;
pub mod invariance;
pub mod rational;
pub mod spec_json;

pub use complementary::{
    build_ks_mapping, closure_generate, complement_mean, complement_value, dual_complement, solve_completion,
    ClosureTree, ComplementSpec,
};
pub use domain::{Domain, SampleConfig};
pub use error::{MeanError, Result};
pub use expr::{IndexSet, MeanExpr, MeanVector};
pub use hfamily::{ExponentVector, SymbolicClosure};
pub use invariance::{invariant_mean_value, iterate_mapping, IterationConfig, IterationReport};
pub use rational::Rational;
