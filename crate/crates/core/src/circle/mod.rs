//! Circle homeomorphisms through their lifts to the real line.

mod denjoy;
mod irrational;
mod lift;
mod rotation;

pub use denjoy::{power_tail, DenjoyMap, DenjoySpec, GapEntry, GapLocation};
pub use irrational::{
    continued_fraction, independence_check, irrationality_report, IndependenceReport,
    IrrationalityReport, QuadraticIrrational,
};
pub use lift::{CircleLift, LiftKind};
pub use rotation::{rotation_number, RotationEstimate};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircleError {
    #[error("invalid Denjoy spec: {0}")]
    InvalidSpec(String),
    #[error("gap table inconsistent after placement: {0}")]
    GapOverlap(String),
    #[error("inverse bisection failed at y = {y}: residual {residual:e}")]
    Bisection { y: f64, residual: f64 },
}

/// Fractional part in `[0, 1)`.
#[inline]
pub(crate) fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    // x = -1e-18 gives r = 1.0 after rounding
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}
