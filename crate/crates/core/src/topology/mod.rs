//! Box domains on the torus: essentiality through deck-vector holonomy,
//! capture diameters of doubly essential domains and forward-invariant hulls.
//!
//! A box domain stands for the open union of its open cells; its
//! essentiality can differ from that of a true domain it approximates at
//! scales below `1/m`.

mod capture;
mod domain;
mod holonomy;
mod hull;

pub use capture::{compute_capture_diameter, CaptureDiameter};
pub use domain::BoxDomain;
pub use holonomy::{
    classify_essentiality, classify_essentiality_seeded, essential_intersection_check, DeckVector,
    Essentiality, EssentialityResult, Lattice,
};
pub use hull::forward_invariant_hull;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("empty domain")]
    EmptyDomain,
    #[error("cell ({i}, {j}) outside the {m}×{m} grid")]
    OutOfRange { i: usize, j: usize, m: usize },
    #[error("grid resolutions differ: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("domain is {0}, not doubly essential")]
    NotDoublyEssential(Essentiality),
    #[error("complement component is unbounded in the plane (holonomy {0:?})")]
    UnboundedComplement(DeckVector),
    #[error("rank-one holonomy generator {0:?} is not primitive")]
    NonPrimitive(DeckVector),
    #[error("malformed box domain: {0}")]
    Parse(String),
}
