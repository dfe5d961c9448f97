use std::sync::Arc;

use super::{CircleError, DenjoyMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Rigid,
    Denjoy,
    RotatedComposite,
}

/// A degree-one, strictly increasing lift `ℝ → ℝ` of an orientation
/// preserving circle homeomorphism.
#[derive(Debug, Clone)]
pub enum CircleLift {
    /// `x ↦ x + alpha`.
    Rigid {
        alpha: f64,
    },
    Denjoy(Arc<DenjoyMap>),
    /// `x ↦ base(x) + theta`, the lift of `R_θ ∘ base`.
    Rotated {
        base: Box<CircleLift>,
        theta: f64,
    },
    /// Factors applied left to right: `factors[n-1] ∘ … ∘ factors[0]`.
    Composite(Arc<[CircleLift]>),
}

impl CircleLift {
    pub fn rigid(alpha: f64) -> Self {
        CircleLift::Rigid { alpha }
    }

    pub fn denjoy(map: Arc<DenjoyMap>) -> Self {
        CircleLift::Denjoy(map)
    }

    pub fn identity() -> Self {
        CircleLift::Rigid { alpha: 0.0 }
    }

    pub fn kind(&self) -> LiftKind {
        match self {
            CircleLift::Rigid { .. } => LiftKind::Rigid,
            CircleLift::Denjoy(_) => LiftKind::Denjoy,
            CircleLift::Rotated { .. } | CircleLift::Composite(_) => LiftKind::RotatedComposite,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CircleLift::Rigid { alpha } => x + alpha,
            CircleLift::Denjoy(map) => map.eval(x),
            CircleLift::Rotated { base, theta } => base.eval(x) + theta,
            CircleLift::Composite(factors) => factors.iter().fold(x, |acc, g| g.eval(acc)),
        }
    }

    /// Solves `eval(x) = y`. Rigid pieces invert in closed form, composites
    /// factor by factor, Denjoy lifts by bisection.
    pub fn inverse_eval(&self, y: f64) -> Result<f64, CircleError> {
        match self {
            CircleLift::Rigid { alpha } => Ok(y - alpha),
            CircleLift::Denjoy(map) => bisect_inverse(|x| map.eval(x), y),
            CircleLift::Rotated { base, theta } => base.inverse_eval(y - theta),
            CircleLift::Composite(factors) => factors
                .iter()
                .rev()
                .try_fold(y, |acc, g| g.inverse_eval(acc)),
        }
    }

    /// The lift of `R_θ ∘ self`.
    pub fn compose_rotation(&self, theta: f64) -> CircleLift {
        match self {
            CircleLift::Rigid { alpha } => CircleLift::Rigid {
                alpha: alpha + theta,
            },
            CircleLift::Rotated { base, theta: t0 } => CircleLift::Rotated {
                base: base.clone(),
                theta: t0 + theta,
            },
            other => CircleLift::Rotated {
                base: Box::new(other.clone()),
                theta,
            },
        }
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &CircleLift) -> CircleLift {
        let mut factors: Vec<CircleLift> = Vec::new();
        for g in [self, other] {
            match g {
                CircleLift::Composite(fs) => factors.extend(fs.iter().cloned()),
                g => factors.push(g.clone()),
            }
        }
        CircleLift::Composite(factors.into())
    }

    pub fn composite(factors: Vec<CircleLift>) -> CircleLift {
        CircleLift::Composite(factors.into())
    }
}

/// Inverts a continuous non-decreasing degree-one map by bracketing and
/// bisection down to adjacent floats. Fails when the residual exceeds `1e-9`,
/// which only happens for non-monotone data.
pub(crate) fn bisect_inverse(f: impl Fn(f64) -> f64, y: f64) -> Result<f64, CircleError> {
    let fail = |residual: f64| CircleError::Bisection { y, residual };
    // f(x) - x is periodic; one evaluation gives a starting guess within a period
    let guess = y - (f(y) - y);
    let mut lo = guess - 1.0;
    let mut hi = guess + 1.0;
    let mut expand = 0;
    while f(lo) > y {
        lo -= 1.0;
        expand += 1;
        if expand > 64 {
            return Err(fail(f64::INFINITY));
        }
    }
    while f(hi) < y {
        hi += 1.0;
        expand += 1;
        if expand > 128 {
            return Err(fail(f64::INFINITY));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = ((f(lo) - y).abs(), (f(hi) - y).abs());
    let (x, r) = if rl <= rh { (lo, rl) } else { (hi, rh) };
    if r > 1e-9 {
        return Err(fail(r));
    }
    Ok(x)
}
