//! Fiber families `s ↦ β(s) = R_{φ(s)} ∘ g₂`.
//!
//! The angle `φ` vanishes on the minimal set of the base Denjoy map and at all
//! gap endpoints. Inside gap `I_n` it is `θ_n · bump(u)` with `θ_n = Θ·decay^{|n|}`
//! and `u` the relative position in the gap. Perturbations add localized
//! radial bumps ("overrides") centered at finitely many base points.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::{circle_distance, TorusError};
use crate::circle::{frac, CircleError, CircleLift, DenjoyMap};

/// `sin²(πu)` on `[0, 1]`: one at the midpoint, zero with zero slope at the ends.
#[inline]
pub fn bump(u: f64) -> f64 {
    let s = (PI * u).sin();
    s * s
}

/// `cos²(πv/2)` for `v < 1`, zero beyond.
#[inline]
pub fn radial_bump(v: f64) -> f64 {
    if v >= 1.0 {
        0.0
    } else {
        let c = (0.5 * PI * v).cos();
        c * c
    }
}

/// Range of `bump` over `[u0, u1] ⊂ [0, 1]`.
fn bump_range(u0: f64, u1: f64) -> (f64, f64) {
    let (b0, b1) = (bump(u0), bump(u1));
    let lo = b0.min(b1);
    let hi = if u0 <= 0.5 && 0.5 <= u1 {
        1.0
    } else {
        b0.max(b1)
    };
    (lo, hi)
}

#[derive(Debug, Clone)]
pub struct GapModulation {
    base: Arc<DenjoyMap>,
    amplitude: f64,
    decay: f64,
    /// θ per gap slot (circle order).
    slot_theta: Vec<f64>,
    /// sparse table of range maxima over `slot_theta`
    sparse: Vec<Vec<f64>>,
}

impl GapModulation {
    fn new(base: Arc<DenjoyMap>, amplitude: f64, decay: f64) -> Self {
        let slot_theta: Vec<f64> = base
            .gaps()
            .map(|g| amplitude * decay.powi(g.index.unsigned_abs().min(i32::MAX as u64) as i32))
            .collect();
        let mut sparse = vec![slot_theta.clone()];
        let mut width = 1;
        while 2 * width <= slot_theta.len() {
            let prev = sparse.last().unwrap();
            let row: Vec<f64> = (0..=slot_theta.len() - 2 * width)
                .map(|i| prev[i].max(prev[i + width]))
                .collect();
            sparse.push(row);
            width *= 2;
        }
        Self {
            base,
            amplitude,
            decay,
            slot_theta,
            sparse,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn theta(&self, n: i64) -> f64 {
        self.amplitude
            * self
                .decay
                .powi(n.unsigned_abs().min(i32::MAX as u64) as i32)
    }

    fn range_max(&self, range: std::ops::Range<usize>) -> f64 {
        if range.is_empty() {
            return 0.0;
        }
        let len = range.end - range.start;
        let level = usize::BITS as usize - 1 - len.leading_zeros() as usize;
        let row = &self.sparse[level];
        row[range.start].max(row[range.end - (1 << level)])
    }

    #[inline]
    fn angle(&self, r: f64) -> f64 {
        let slot = self.base.slot_at(r);
        let g = self.base.slot_entry(slot);
        if r > g.left && r < g.right() {
            self.slot_theta[slot] * bump((r - g.left) / g.length)
        } else {
            0.0
        }
    }

    /// Bounds of the angle over `[a, b] ⊂ [0, 1]`.
    fn range(&self, a: f64, b: f64) -> (f64, f64) {
        let slots = self.base.slots_meeting(a, b);
        if slots.is_empty() {
            return (0.0, 0.0);
        }
        let partial = |slot: usize| {
            let g = self.base.slot_entry(slot);
            let u0 = ((a - g.left) / g.length).clamp(0.0, 1.0);
            let u1 = ((b - g.left) / g.length).clamp(0.0, 1.0);
            let (lo, hi) = bump_range(u0, u1);
            (self.slot_theta[slot] * lo, self.slot_theta[slot] * hi)
        };
        if slots.len() == 1 {
            let slot = slots.start;
            let g = self.base.slot_entry(slot);
            let (lo, hi) = partial(slot);
            // inside a single open gap the lower bound is positive
            let inside = a > g.left && b < g.right();
            return (if inside { lo } else { 0.0 }, hi);
        }
        let first = partial(slots.start).1;
        let last = partial(slots.end - 1).1;
        let middle = self.range_max(slots.start + 1..slots.end - 1);
        (0.0, first.max(last).max(middle))
    }
}

/// A finite-support bump `angle · radial_bump(d / radius)` around `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberOverride {
    pub center: f64,
    pub angle: f64,
    pub radius: f64,
}

impl FiberOverride {
    #[inline]
    fn value(&self, r: f64) -> f64 {
        self.angle * radial_bump(circle_distance(r, self.center) / self.radius)
    }
}

#[derive(Debug, Clone)]
pub struct FiberFamily {
    base: CircleLift,
    core: CircleLift,
    modulation: Option<GapModulation>,
    /// sorted by center, pairwise disjoint supports
    overrides: Vec<FiberOverride>,
}

impl FiberFamily {
    /// `β(s) = g₂` for every `s`.
    pub fn constant(base: CircleLift, core: CircleLift) -> Self {
        Self {
            base,
            core,
            modulation: None,
            overrides: Vec::new(),
        }
    }

    /// Gap-modulated family over a Denjoy base: `θ_n = amplitude · decay^{|n|}`.
    pub fn gap_modulated(
        base: Arc<DenjoyMap>,
        core: CircleLift,
        amplitude: f64,
        decay: f64,
    ) -> Result<Self, TorusError> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(TorusError::InvalidParameter(format!(
                "modulation amplitude {amplitude} must be non-negative"
            )));
        }
        if !(decay > 0.0 && decay < 1.0) {
            return Err(TorusError::InvalidParameter(format!(
                "modulation decay {decay} outside (0, 1)"
            )));
        }
        let modulation =
            (amplitude > 0.0).then(|| GapModulation::new(base.clone(), amplitude, decay));
        Ok(Self {
            base: CircleLift::denjoy(base),
            core,
            modulation,
            overrides: Vec::new(),
        })
    }

    /// Adds overrides; supports must be pairwise disjoint.
    pub fn with_overrides(&self, extra: &[FiberOverride]) -> Result<Self, TorusError> {
        let mut all = self.overrides.clone();
        all.extend_from_slice(extra);
        for o in &all {
            if !(o.radius > 0.0 && o.radius < 0.25) || !o.angle.is_finite() {
                return Err(TorusError::InvalidParameter(format!("bad override {o:?}")));
            }
        }
        let mut all: Vec<FiberOverride> = all
            .into_iter()
            .map(|o| FiberOverride {
                center: frac(o.center),
                ..o
            })
            .collect();
        all.sort_by(|a, b| a.center.total_cmp(&b.center));
        for w in 0..all.len() {
            let (a, b) = (all[w], all[(w + 1) % all.len()]);
            if all.len() > 1 && circle_distance(a.center, b.center) <= a.radius + b.radius {
                return Err(TorusError::InvalidParameter(format!(
                    "override supports around {} and {} overlap",
                    a.center, b.center
                )));
            }
        }
        Ok(Self {
            overrides: all,
            ..self.clone()
        })
    }

    pub fn base(&self) -> &CircleLift {
        &self.base
    }

    pub fn core(&self) -> &CircleLift {
        &self.core
    }

    pub fn modulation(&self) -> Option<&GapModulation> {
        self.modulation.as_ref()
    }

    pub fn overrides(&self) -> &[FiberOverride] {
        &self.overrides
    }

    pub fn base_denjoy(&self) -> Option<&Arc<DenjoyMap>> {
        match &self.base {
            CircleLift::Denjoy(m) => Some(m),
            _ => None,
        }
    }

    /// The rotation angle `φ(s)` with `β(s) = R_{φ(s)} ∘ g₂`.
    #[inline]
    pub fn angle(&self, s: f64) -> f64 {
        let r = frac(s);
        let mut phi = match &self.modulation {
            Some(m) => m.angle(r),
            None => 0.0,
        };
        if !self.overrides.is_empty() {
            let i = self.overrides.partition_point(|o| o.center < r);
            let n = self.overrides.len();
            for j in [i % n, (i + n - 1) % n] {
                phi += self.overrides[j].value(r);
                if n == 1 {
                    break;
                }
            }
        }
        phi
    }

    /// Outer bounds of `φ` over the lifted interval `[lo, hi]`.
    pub fn angle_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        if hi - lo >= 1.0 {
            return (0.0, self.max_angle());
        }
        let a = frac(lo);
        let b = a + (hi - lo);
        if b <= 1.0 {
            self.piece_range(a, b)
        } else {
            let (l1, h1) = self.piece_range(a, 1.0);
            let (l2, h2) = self.piece_range(0.0, b - 1.0);
            (l1.min(l2), h1.max(h2))
        }
    }

    fn piece_range(&self, a: f64, b: f64) -> (f64, f64) {
        let (mut lo, mut hi) = match &self.modulation {
            Some(m) => m.range(a, b),
            None => (0.0, 0.0),
        };
        let mut over_lo = 0.0;
        let mut over_hi: f64 = 0.0;
        for o in &self.overrides {
            let d_center = if o.center >= a && o.center <= b {
                0.0
            } else {
                circle_distance(o.center, a).min(circle_distance(o.center, b))
            };
            if d_center >= o.radius {
                continue;
            }
            over_hi = over_hi.max(o.angle * radial_bump(d_center / o.radius));
            let (da, db) = (circle_distance(o.center, a), circle_distance(o.center, b));
            if da < o.radius && db < o.radius && b - a < 2.0 * o.radius {
                over_lo = o.angle * radial_bump(da / o.radius).min(radial_bump(db / o.radius));
            }
        }
        lo += over_lo;
        hi += over_hi;
        (lo, hi)
    }

    pub fn max_angle(&self) -> f64 {
        let m = self
            .modulation
            .as_ref()
            .map(|m| m.range_max(0..m.slot_theta.len()))
            .unwrap_or(0.0);
        let o = self.overrides.iter().map(|o| o.angle).fold(0.0, f64::max);
        m + o
    }

    /// `β(s)` as a circle lift.
    pub fn lift_at(&self, s: f64) -> CircleLift {
        self.core.compose_rotation(self.angle(s))
    }

    /// Lift of `β(s)(t)`.
    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.core.eval(t) + self.angle(s)
    }

    /// Solves `β(s)(t) = y` for `t`.
    pub fn inverse_eval(&self, s: f64, y: f64) -> Result<f64, CircleError> {
        self.core.inverse_eval(y - self.angle(s))
    }

    /// Largest `|φ(s) − φ'(s)|` over `samples` equally spaced base points.
    pub fn sampled_distance(&self, other: &FiberFamily, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let s = (i as f64 + 0.5) / samples as f64;
                (self.angle(s) - other.angle(s)).abs()
            })
            .fold(0.0, f64::max)
    }
}
