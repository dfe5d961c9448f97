//! Box-level chain dynamics: transition graphs, chain reachability, the
//! finite-horizon nonwandering over-approximation, two-jump pseudo-orbits and
//! weak transitivity.
//!
//! The nonwandering set is approximated by the boxes whose iterated
//! enclosures come back within a horizon. The chain-recurrent set (union of
//! cyclic strongly connected components) is reported but never used in its
//! place: for the maps studied here it is the whole torus.

mod graph;
mod nonwandering;
mod pseudo;
mod weak;

pub use graph::{
    build_transition_graph, chain_path, chain_report_on, chain_transitivity_report, check_epsilon,
    ChainReport, EnclosureMode, GraphStats, PairResult, TransitionGraph,
};
pub use nonwandering::{
    first_return, nonwandering_approx, NonwanderingApprox, NonwanderingSummary, ReturnOracle,
};
pub use pseudo::{
    two_jump_pseudo_orbit, validate_pseudo_orbit, PseudoOrbit, PseudoOrbitCheck, TwoJumpBudgets,
    TwoJumpInfo, JUMP_TOLERANCE,
};
pub use weak::{weak_transitivity_check, WeakTransitivityHit};

use thiserror::Error;

use crate::circle::CircleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("epsilon {epsilon} below the box diameter {min}")]
    InvalidEpsilon { epsilon: f64, min: f64 },
    #[error("empty box set")]
    EmptySet,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{what}: budget of {budget} exhausted")]
    BudgetExhausted { what: &'static str, budget: u64 },
    #[error(
        "no connector found with {samples} samples and orbits of length {orbit}; nearest miss {best_distance}"
    )]
    ConnectorExhausted {
        best_distance: f64,
        samples: usize,
        orbit: u64,
    },
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error("malformed pseudo-orbit: {0}")]
    Parse(String),
}

impl ChainError {
    /// Budget exhaustion is inconclusive rather than a failure.
    pub fn is_inconclusive(&self) -> bool {
        matches!(
            self,
            ChainError::BudgetExhausted { .. } | ChainError::ConnectorExhausted { .. }
        )
    }
}
