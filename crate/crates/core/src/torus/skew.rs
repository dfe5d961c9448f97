use std::sync::Arc;

use serde::Serialize;

use super::{FiberFamily, Rect, TorusPoint, ENCLOSURE_PAD};
use crate::circle::{frac, CircleError, CircleLift, DenjoyMap};

/// The torus map `(s, t) ↦ (g₁(s), β(s)(t))` with plane lift
/// `F(s, t) = (G₁(s), G₂(t) + φ(s))`.
#[derive(Debug, Clone)]
pub struct SkewProduct {
    beta: FiberFamily,
}

/// A point of the plane stored as an integer cell plus a point of `[0, 1)²`,
/// so long orbits of the lift keep full precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiftPoint {
    pub cell: (i64, i64),
    pub frac: (f64, f64),
}

impl LiftPoint {
    pub fn from_plane(s: f64, t: f64) -> Self {
        let (fs, ft) = (s.floor(), t.floor());
        Self {
            cell: (fs as i64, ft as i64),
            frac: (frac(s), frac(t)),
        }
    }

    pub fn torus(&self) -> TorusPoint {
        TorusPoint {
            s: self.frac.0,
            t: self.frac.1,
        }
    }

    /// Coordinates in the plane (precision limited by their magnitude).
    pub fn plane(&self) -> (f64, f64) {
        (
            self.cell.0 as f64 + self.frac.0,
            self.cell.1 as f64 + self.frac.1,
        )
    }

    /// `self − other` computed from the integer and fractional parts separately.
    pub fn displacement_from(&self, other: &LiftPoint) -> (f64, f64) {
        (
            (self.cell.0 - other.cell.0) as f64 + (self.frac.0 - other.frac.0),
            (self.cell.1 - other.cell.1) as f64 + (self.frac.1 - other.frac.1),
        )
    }
}

impl SkewProduct {
    pub fn new(beta: FiberFamily) -> Self {
        Self { beta }
    }

    pub fn beta(&self) -> &FiberFamily {
        &self.beta
    }

    pub fn base(&self) -> &CircleLift {
        self.beta.base()
    }

    pub fn base_denjoy(&self) -> Option<&Arc<DenjoyMap>> {
        self.beta.base_denjoy()
    }

    /// Same base, different fiber family.
    pub fn with_beta(&self, beta: FiberFamily) -> Self {
        Self { beta }
    }

    /// The lift `F` on the plane.
    #[inline]
    pub fn lift_eval(&self, s: f64, t: f64) -> (f64, f64) {
        (self.beta.base().eval(s), self.beta.eval(frac(s), t))
    }

    /// The torus map.
    #[inline]
    pub fn eval(&self, p: TorusPoint) -> TorusPoint {
        let (s, t) = self.lift_eval(p.s, p.t);
        TorusPoint::new(s, t)
    }

    pub fn inverse(&self, p: TorusPoint) -> Result<TorusPoint, CircleError> {
        let s = self.beta.base().inverse_eval(p.s)?;
        let t = self.beta.inverse_eval(frac(s), p.t)?;
        Ok(TorusPoint::new(s, t))
    }

    #[inline]
    pub fn step(&self, z: LiftPoint) -> LiftPoint {
        let (s, t) = self.lift_eval(z.frac.0, z.frac.1);
        let (fs, ft) = (s.floor(), t.floor());
        LiftPoint {
            cell: (z.cell.0 + fs as i64, z.cell.1 + ft as i64),
            frac: (frac(s - fs), frac(t - ft)),
        }
    }

    pub fn iterate(&self, z: LiftPoint, n: u64) -> LiftPoint {
        (0..n).fold(z, |acc, _| self.step(acc))
    }

    pub fn iterate_torus(&self, p: TorusPoint, n: u64) -> TorusPoint {
        (0..n).fold(p, |acc, _| self.eval(acc))
    }

    /// Outer enclosure of `F(rect)`. Both coordinates are monotone in the
    /// corresponding input, so the base interval is exact and the fiber
    /// interval only needs the range of `φ` over the base interval.
    pub fn image_rect(&self, rect: &Rect) -> Rect {
        let base = self.beta.base();
        let core = self.beta.core();
        let (plo, phi) = self.beta.angle_range(rect.s.0, rect.s.1);
        let s = (
            base.eval(rect.s.0) - ENCLOSURE_PAD,
            base.eval(rect.s.1) + ENCLOSURE_PAD,
        );
        let t = (
            core.eval(rect.t.0) + plo - ENCLOSURE_PAD,
            core.eval(rect.t.1) + phi + ENCLOSURE_PAD,
        );
        Rect { s, t }.normalized()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationVectorEstimate {
    pub vector: (f64, f64),
    pub error_bound: f64,
    pub iterations: u64,
    pub start: TorusPoint,
}

/// `(F^n(z₀) − z₀) / n`.
pub fn rotation_vector(f: &SkewProduct, z0: TorusPoint, n_iters: u64) -> RotationVectorEstimate {
    assert!(n_iters >= 1, "rotation_vector needs at least one iteration");
    let start = LiftPoint::from_plane(z0.s, z0.t);
    let end = f.iterate(start, n_iters);
    let (ds, dt) = end.displacement_from(&start);
    let n = n_iters as f64;
    RotationVectorEstimate {
        vector: (ds / n, dt / n),
        error_bound: 2.0 / n,
        iterations: n_iters,
        start: z0,
    }
}
