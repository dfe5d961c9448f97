//! Axis-aligned rectangles in the plane used as outer enclosures of images
//! of boxes under a skew product.

use serde::Serialize;

/// Padding added to each side of an image rectangle to absorb rounding in
/// the corner evaluations.
pub const ENCLOSURE_PAD: f64 = 1e-12;

/// `[s.0, s.1] × [t.0, t.1]` in lifted coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub s: (f64, f64),
    pub t: (f64, f64),
}

/// Is there an integer `p` with `[lo, hi] ∩ [a + p, b + p] ≠ ∅`?
#[inline]
fn meets_mod_one(lo: f64, hi: f64, a: f64, b: f64) -> bool {
    if hi - lo >= 1.0 {
        return true;
    }
    (lo - b).ceil() <= hi - a
}

/// Gap between `[lo, hi]` and the translates of `[a, b]` by integers.
#[inline]
fn gap_mod_one(lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if meets_mod_one(lo, hi, a, b) {
        return 0.0;
    }
    // nearest translate on each side
    let p = (lo - b).ceil();
    let right = a + p - hi;
    let left = lo - (b + p - 1.0);
    right.min(left).max(0.0)
}

impl Rect {
    /// The closed grid cell `(i, j)` of an `m × m` grid.
    pub fn cell(m: usize, i: usize, j: usize) -> Self {
        let h = 1.0 / m as f64;
        Self {
            s: (i as f64 * h, (i + 1) as f64 * h),
            t: (j as f64 * h, (j + 1) as f64 * h),
        }
    }

    pub fn width(&self) -> f64 {
        self.s.1 - self.s.0
    }

    pub fn height(&self) -> f64 {
        self.t.1 - self.t.0
    }

    /// Shifts by integers so that the lower-left corner lies in `[0, 1)²`.
    pub fn normalized(&self) -> Self {
        let ds = self.s.0.floor();
        let dt = self.t.0.floor();
        Self {
            s: (self.s.0 - ds, self.s.1 - ds),
            t: (self.t.0 - dt, self.t.1 - dt),
        }
    }

    /// Closed intersection on the torus.
    pub fn meets_on_torus(&self, other: &Rect) -> bool {
        meets_mod_one(self.s.0, self.s.1, other.s.0, other.s.1)
            && meets_mod_one(self.t.0, self.t.1, other.t.0, other.t.1)
    }

    /// Euclidean distance to `other` in the torus metric (0 when they meet).
    pub fn torus_distance(&self, other: &Rect) -> f64 {
        let ds = gap_mod_one(self.s.0, self.s.1, other.s.0, other.s.1);
        let dt = gap_mod_one(self.t.0, self.t.1, other.t.0, other.t.1);
        ds.hypot(dt)
    }

    /// Cells of an `m × m` grid at torus distance `< eps` from this rectangle
    /// (or meeting it when `eps == 0`), sorted by linear index `i·m + j`.
    pub fn cells_within(&self, m: usize, eps: f64) -> Vec<u32> {
        let mf = m as f64;
        let axis = |lo: f64, hi: f64| -> Vec<usize> {
            let a = ((lo - eps) * mf).floor() as i64;
            let b = ((hi + eps) * mf).floor() as i64;
            if b - a + 1 >= m as i64 {
                (0..m).collect()
            } else {
                (a..=b).map(|k| k.rem_euclid(m as i64) as usize).collect()
            }
        };
        let is = axis(self.s.0, self.s.1);
        let js = axis(self.t.0, self.t.1);
        let mut out = Vec::with_capacity(is.len() * js.len());
        for &i in &is {
            for &j in &js {
                let c = Rect::cell(m, i, j);
                let d = self.torus_distance(&c);
                let keep = if eps > 0.0 {
                    d < eps
                } else {
                    self.meets_on_torus(&c)
                };
                if keep {
                    out.push((i * m + j) as u32);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}
