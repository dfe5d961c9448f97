//! Skew products `f_β(s, t) = (g₁(s), β(s)(t))` on the two-torus and their
//! lifts to the plane.

mod enclosure;
mod fiber;
mod perturb;
mod presets;
mod skew;

pub use enclosure::{Rect, ENCLOSURE_PAD};
pub use fiber::{bump, radial_bump, FiberFamily, FiberOverride, GapModulation};
pub use perturb::{
    build_return_perturbation, fiber_composition, find_displacement_time, verify_return,
    verify_return_on_segment, ReturnCheck, ReturnPerturbation, DISPLACEMENT_BUDGET,
    MIN_BUMP_RADIUS,
};
pub use presets::{denjoy_product, rigid_translation, skew_example, SkewExampleParams};
pub use skew::{rotation_vector, LiftPoint, RotationVectorEstimate, SkewProduct};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::CircleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{what}: budget of {budget} exhausted")]
    BudgetExhausted { what: &'static str, budget: u64 },
    #[error("no enumerated gap of the base map fits in ({lo}, {hi}); increase the truncation")]
    NoGapInWindow { lo: f64, hi: f64 },
    #[error("override bump radius {radius:e} below the minimum {min:e}")]
    RadiusTooSmall { radius: f64, min: f64 },
}

/// A point of `T² = ℝ²/ℤ²` with both coordinates in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint {
    pub s: f64,
    pub t: f64,
}

impl TorusPoint {
    pub fn new(s: f64, t: f64) -> Self {
        Self {
            s: crate::circle::frac(s),
            t: crate::circle::frac(t),
        }
    }

    /// Euclidean distance in the flat torus metric.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        let ds = circle_distance(self.s, other.s);
        let dt = circle_distance(self.t, other.t);
        ds.hypot(dt)
    }
}

/// Distance on `ℝ/ℤ`.
#[inline]
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = crate::circle::frac(a - b);
    d.min(1.0 - d)
}
