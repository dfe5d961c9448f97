//! Denjoy counterexamples built by inserting wandering gaps along a rigid
//! rotation orbit.
//!
//! The gap `I_n` (for `|n| ≤ N`) has length `ℓ_n = c₀ (|n| + 1)^{-p}` and is
//! inserted at the rigid-rotation point `{nα}`. Writing `Φ` for the blow-up
//! map from the rigid circle to the Denjoy circle,
//!
//! ```text
//! Φ(x) = c·x + Σ_{ {kα} < x } ℓ_k,    c = 1 − Σ_{|k| ≤ N} ℓ_k,
//! ```
//!
//! the map is `Φ(x) ↦ Φ(x + α)` on the Cantor part and affine `I_n → I_{n+1}`
//! on gaps. The gaps beyond the truncation carry total mass `δ(N)`, which is
//! absorbed into the Cantor scale `c` and reported as an evaluation-error
//! budget. The last enumerated gap `I_N` has no successor and collapses onto
//! the point `Φ({(N+1)α})`; its width is of order `c₀ N^{-p}`, far below every
//! tolerance used by callers.

use serde::Serialize;

use super::{frac, CircleError, QuadraticIrrational};

/// Upper limit on the discarded gap mass at construction.
pub const MAX_TAIL_MASS: f64 = 1e-8;

/// `Σ_{m ≥ start} m^{-p}` for `p > 1`, `start ≥ 1`.
///
/// Direct summation of the first 64 terms followed by an Euler–Maclaurin
/// tail; the truncation error is far below double precision for `p ≥ 1.5`.
pub fn power_tail(p: f64, start: u64) -> f64 {
    assert!(p > 1.0 && start >= 1);
    const DIRECT: u64 = 64;
    let mut s = 0.0;
    for m in start..start + DIRECT {
        s += (m as f64).powf(-p);
    }
    let m = (start + DIRECT) as f64;
    let f = m.powf(-p);
    let integral = m.powf(1.0 - p) / (p - 1.0);
    let d1 = -p * m.powf(-p - 1.0);
    let d3 = -p * (p + 1.0) * (p + 2.0) * m.powf(-p - 3.0);
    s + integral + 0.5 * f - d1 / 12.0 + d3 / 720.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenjoySpec {
    pub alpha: QuadraticIrrational,
    pub alpha_value: f64,
    pub gap_coefficient: f64,
    pub gap_exponent: f64,
    pub truncation: usize,
    total_gap: f64,
    tail: f64,
}

impl DenjoySpec {
    pub fn new(
        alpha: QuadraticIrrational,
        gap_coefficient: f64,
        gap_exponent: f64,
        truncation: usize,
    ) -> Result<Self, CircleError> {
        let invalid = |m: String| Err(CircleError::InvalidSpec(m));
        if !alpha.is_irrational() {
            return invalid(format!(
                "rotation number {alpha} is not a quadratic irrational"
            ));
        }
        let alpha_value = alpha.value();
        if !(alpha_value > 0.0 && alpha_value < 1.0) {
            return invalid(format!("rotation number {alpha_value} outside (0, 1)"));
        }
        if !(gap_coefficient > 0.0 && gap_coefficient.is_finite()) {
            return invalid(format!(
                "gap coefficient {gap_coefficient} must be positive"
            ));
        }
        if !(gap_exponent > 1.0 && gap_exponent.is_finite()) {
            return invalid(format!("gap exponent {gap_exponent} must exceed 1"));
        }
        if truncation == 0 {
            return invalid("truncation must be positive".into());
        }
        // Σ_{n∈ℤ} (|n|+1)^{-p} = 2ζ(p) − 1
        let total_gap = gap_coefficient * (1.0 + 2.0 * power_tail(gap_exponent, 2));
        let tail = 2.0 * gap_coefficient * power_tail(gap_exponent, truncation as u64 + 2);
        if total_gap >= 1.0 {
            return invalid(format!("total gap length {total_gap} is not below 1"));
        }
        if tail >= MAX_TAIL_MASS {
            return invalid(format!(
                "tail mass δ(N) = {tail:e} not below {MAX_TAIL_MASS:e}; increase N or p"
            ));
        }
        Ok(Self {
            alpha,
            alpha_value,
            gap_coefficient,
            gap_exponent,
            truncation,
            total_gap,
            tail,
        })
    }

    /// Chooses `c₀` so that the untruncated gaps have total length `total_gap`.
    pub fn with_total_gap(
        alpha: QuadraticIrrational,
        total_gap: f64,
        gap_exponent: f64,
        truncation: usize,
    ) -> Result<Self, CircleError> {
        if !(total_gap > 0.0 && total_gap < 1.0) {
            return Err(CircleError::InvalidSpec(format!(
                "total gap length {total_gap} outside (0, 1)"
            )));
        }
        if !(gap_exponent > 1.0) {
            return Err(CircleError::InvalidSpec(format!(
                "gap exponent {gap_exponent} must exceed 1"
            )));
        }
        let c0 = total_gap / (1.0 + 2.0 * power_tail(gap_exponent, 2));
        Self::new(alpha, c0, gap_exponent, truncation)
    }

    pub fn gap_length(&self, n: i64) -> f64 {
        self.gap_coefficient * ((n.unsigned_abs() + 1) as f64).powf(-self.gap_exponent)
    }

    /// `L = Σ_{n∈ℤ} ℓ_n`.
    pub fn total_gap(&self) -> f64 {
        self.total_gap
    }

    /// `δ(N) = Σ_{|n|>N} ℓ_n`.
    pub fn tail_bound(&self) -> f64 {
        self.tail
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapEntry {
    pub index: i64,
    pub left: f64,
    pub length: f64,
}

impl GapEntry {
    pub fn right(&self) -> f64 {
        self.left + self.length
    }

    pub fn midpoint(&self) -> f64 {
        self.left + 0.5 * self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapLocation {
    /// Strictly inside the enumerated gap `I_index`.
    Gap {
        index: i64,
        distance_to_minimal: f64,
    },
    /// Outside every enumerated gap. The point may still sit in one of the
    /// discarded tail gaps, whose total length is `uncertainty`.
    Cantor { uncertainty: f64 },
}

impl GapLocation {
    pub fn gap_index(&self) -> Option<i64> {
        match self {
            GapLocation::Gap { index, .. } => Some(*index),
            GapLocation::Cantor { .. } => None,
        }
    }

    pub fn is_cantor(&self) -> bool {
        matches!(self, GapLocation::Cantor { .. })
    }
}

/// A constructed Denjoy counterexample. Gaps are stored in slots sorted by
/// position on the circle.
#[derive(Debug, Clone)]
pub struct DenjoyMap {
    spec: DenjoySpec,
    alpha: f64,
    scale: f64,
    enumerated_gap: f64,
    rigid: Vec<f64>,
    index: Vec<i64>,
    left: Vec<f64>,
    length: Vec<f64>,
    prefix: Vec<f64>,
    img_lo: Vec<f64>,
    img_hi: Vec<f64>,
    slot_of: Vec<usize>,
}

/// `{kα}` with a single rounding.
fn orbit_point(k: i64, alpha: f64) -> f64 {
    let kf = k as f64;
    let fl = (kf * alpha).floor();
    let r = kf.mul_add(alpha, -fl);
    frac(r)
}

impl DenjoyMap {
    pub fn build(spec: DenjoySpec) -> Result<Self, CircleError> {
        let big_n = spec.truncation as i64;
        let alpha = spec.alpha_value;
        let count = (2 * big_n + 1) as usize;

        let mut slots: Vec<(f64, i64)> = (-big_n..=big_n)
            .map(|k| (orbit_point(k, alpha), k))
            .collect();
        slots.sort_by(|a, b| a.0.total_cmp(&b.0));

        let rigid: Vec<f64> = slots.iter().map(|s| s.0).collect();
        let index: Vec<i64> = slots.iter().map(|s| s.1).collect();
        let length: Vec<f64> = index.iter().map(|&n| spec.gap_length(n)).collect();
        let mut slot_of = vec![0usize; count];
        for (slot, &n) in index.iter().enumerate() {
            slot_of[(n + big_n) as usize] = slot;
        }

        let mut prefix = Vec::with_capacity(count + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &l in &length {
            acc += l;
            prefix.push(acc);
        }
        let enumerated_gap = acc;
        let scale = 1.0 - enumerated_gap;
        if scale <= 0.0 {
            return Err(CircleError::InvalidSpec(
                "enumerated gaps exhaust the circle".into(),
            ));
        }
        let left: Vec<f64> = rigid
            .iter()
            .zip(&prefix)
            .map(|(&x, &s)| scale * x + s)
            .collect();

        let mut map = DenjoyMap {
            spec,
            alpha,
            scale,
            enumerated_gap,
            rigid,
            index,
            left,
            length,
            prefix,
            img_lo: Vec::new(),
            img_hi: Vec::new(),
            slot_of,
        };

        for i in 0..count {
            let right = map.left[i] + map.length[i];
            let next_left = if i + 1 < count { map.left[i + 1] } else { 1.0 };
            if !(right < next_left) {
                return Err(CircleError::GapOverlap(format!(
                    "gap I_{} ends at {right} past the next gap start {next_left}",
                    map.index[i]
                )));
            }
        }

        let mut img_lo = Vec::with_capacity(count);
        let mut img_hi = Vec::with_capacity(count);
        for i in 0..count {
            let n = map.index[i];
            if n < big_n {
                let next = map.slot_of[(n + 1 + big_n) as usize];
                let shift = (map.rigid[i] + alpha - map.rigid[next]).round();
                let lo = map.left[next] + shift;
                img_lo.push(lo);
                img_hi.push(lo + map.length[next]);
            } else {
                let v = map.phi(map.rigid[i] + alpha);
                img_lo.push(v);
                img_hi.push(v);
            }
        }
        for i in 0..count {
            let next_lo = if i + 1 < count {
                img_lo[i + 1]
            } else {
                img_lo[0] + 1.0
            };
            if img_hi[i] > next_lo {
                return Err(CircleError::GapOverlap(format!(
                    "image of gap I_{} overlaps the image of its successor",
                    map.index[i]
                )));
            }
        }
        map.img_lo = img_lo;
        map.img_hi = img_hi;
        Ok(map)
    }

    pub fn spec(&self) -> &DenjoySpec {
        &self.spec
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn truncation(&self) -> i64 {
        self.spec.truncation as i64
    }

    pub fn gap_count(&self) -> usize {
        self.index.len()
    }

    /// Sum of the enumerated gap lengths, `L − δ(N)`.
    pub fn enumerated_gap_length(&self) -> f64 {
        self.enumerated_gap
    }

    pub fn minimal_set_tolerance(&self) -> f64 {
        self.spec.tail_bound()
    }

    /// Slope of the blow-up map on the Cantor part.
    pub fn cantor_scale(&self) -> f64 {
        self.scale
    }

    pub fn gap(&self, n: i64) -> Option<GapEntry> {
        let big_n = self.truncation();
        if n.abs() > big_n {
            return None;
        }
        Some(self.slot_entry(self.slot_of[(n + big_n) as usize]))
    }

    /// Gaps in circle order.
    pub fn gaps(&self) -> impl Iterator<Item = GapEntry> + '_ {
        (0..self.index.len()).map(|i| self.slot_entry(i))
    }

    pub(crate) fn slot_entry(&self, slot: usize) -> GapEntry {
        GapEntry {
            index: self.index[slot],
            left: self.left[slot],
            length: self.length[slot],
        }
    }

    /// Slot of the last gap whose left endpoint is `≤ r`, for `r ∈ [0, 1)`.
    #[inline]
    pub(crate) fn slot_at(&self, r: f64) -> usize {
        self.left.partition_point(|&l| l <= r).saturating_sub(1)
    }

    /// Slots whose closed gaps meet `[lo, hi] ⊂ [0, 1]`, as a range.
    pub(crate) fn slots_meeting(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = {
            let i = self.slot_at(lo);
            if lo > self.left[i] + self.length[i] {
                i + 1
            } else {
                i
            }
        };
        let end = self.left.partition_point(|&l| l <= hi);
        first..end.max(first)
    }

    /// Blow-up map from the rigid circle, as a lift.
    fn phi(&self, x: f64) -> f64 {
        let fl = x.floor();
        let y = x - fl;
        let j = self.rigid.partition_point(|&p| p < y);
        fl + self.scale * y + self.prefix[j]
    }

    /// Collapse map to the rigid circle; gaps go to their insertion point.
    pub fn semiconjugacy(&self, t: f64) -> f64 {
        let fl = t.floor();
        let r = t - fl;
        let i = self.slot_at(r);
        if r <= self.left[i] + self.length[i] {
            return fl + self.rigid[i];
        }
        let upper = self.rigid.get(i + 1).copied().unwrap_or(1.0);
        fl + ((r - self.prefix[i + 1]) / self.scale).clamp(self.rigid[i], upper)
    }

    #[inline]
    fn eval_unit(&self, r: f64) -> f64 {
        let i = self.slot_at(r);
        let right = self.left[i] + self.length[i];
        if r <= right {
            let u = (r - self.left[i]) / self.length[i];
            return self.img_lo[i] + u * (self.img_hi[i] - self.img_lo[i]);
        }
        let upper_rigid = self.rigid.get(i + 1).copied().unwrap_or(1.0);
        let x = ((r - self.prefix[i + 1]) / self.scale).clamp(self.rigid[i], upper_rigid);
        let v = self.phi(x + self.alpha);
        let hi = if i + 1 < self.img_lo.len() {
            self.img_lo[i + 1]
        } else {
            self.img_lo[0] + 1.0
        };
        v.clamp(self.img_hi[i], hi)
    }

    /// Lift evaluation.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let fl = x.floor();
        let r = x - fl;
        if r >= 1.0 {
            return fl + 1.0 + self.eval_unit(0.0);
        }
        fl + self.eval_unit(r)
    }

    pub fn gap_locate(&self, t: f64) -> GapLocation {
        let r = frac(t);
        let i = self.slot_at(r);
        let (l, len) = (self.left[i], self.length[i]);
        if r > l && r < l + len {
            GapLocation::Gap {
                index: self.index[i],
                distance_to_minimal: (r - l).min(l + len - r),
            }
        } else {
            GapLocation::Cantor {
                uncertainty: self.spec.tail_bound(),
            }
        }
    }
}
