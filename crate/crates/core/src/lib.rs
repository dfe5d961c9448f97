//! Numerical laboratory for non-resonant torus homeomorphisms.
//!
//! The crate builds explicit maps of the two-torus homotopic to the identity
//! (rigid translations, products of Denjoy counterexamples and Denjoy skew
//! products `(s, t) ↦ (g₁(s), β(s)(t))`) and checks recurrence properties of
//! them numerically:
//!
//! * [`circle`]: circle homeomorphism lifts, Denjoy counterexamples and
//!   rotation numbers.
//! * [`torus`]: skew products, rotation vectors, fiber compositions and the
//!   return-forcing fiber perturbation.
//! * [`topology`]: box domains on the torus, essentiality classification via
//!   deck-translation holonomy, capture diameters and forward-invariant hulls.
//! * [`chain`]: transition graphs, chain reachability, nonwandering
//!   approximations, two-jump pseudo-orbits and weak transitivity.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod circle;
pub mod topology;
pub mod torus;

pub use circle::{CircleError, CircleLift, DenjoyMap, DenjoySpec, QuadraticIrrational};
pub use torus::{FiberFamily, SkewProduct, TorusError, TorusPoint};
