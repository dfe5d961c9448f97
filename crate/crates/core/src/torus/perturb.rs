//! Fiber compositions along base orbits and the return-forcing perturbation:
//! rotating the fibers by a small `θ` along a finite stretch of one gap
//! orbit until the perturbed fiber lift has gained a full turn, which forces
//! a thin horizontal segment to sweep across its own ball.

use rayon::prelude::*;
use serde::Serialize;

use super::{circle_distance, FiberFamily, FiberOverride, SkewProduct, TorusError, TorusPoint};
use crate::circle::{frac, CircleLift};

/// Cap on the number of steps searched for a full-turn displacement.
pub const DISPLACEMENT_BUDGET: u64 = 1_000_000;

/// Smallest admissible override bump radius.
pub const MIN_BUMP_RADIUS: f64 = 1e-9;

/// How many gap indices (by `|n|`) are tried as the starting gap.
const CANDIDATE_GAPS: i64 = 64;

/// Lift of `β_θ^n(s₀) = R_θ∘β(s_{n−1}) ∘ … ∘ R_θ∘β(s₀)` with `s_j = g₁^j(s₀)`.
pub fn fiber_composition(beta: &FiberFamily, s0: f64, n: u64, theta: f64) -> CircleLift {
    let mut factors = Vec::with_capacity(n as usize);
    let mut s = s0;
    for _ in 0..n {
        factors.push(beta.lift_at(s).compose_rotation(theta));
        s = beta.base().eval(s);
    }
    if factors.len() == 1 {
        return factors.pop().unwrap();
    }
    CircleLift::composite(factors)
}

/// Least `n` with `β̃_θ^n(s₀)(t) − β̃^n(s₀)(t) > 1`.
pub fn find_displacement_time(
    beta: &FiberFamily,
    s0: f64,
    t: f64,
    theta: f64,
) -> Result<u64, TorusError> {
    if !(theta > 0.0) {
        return Err(TorusError::Precondition(format!(
            "displacement needs a positive rotation, got {theta}"
        )));
    }
    if let Some(g1) = beta.base_denjoy() {
        if g1.gap_locate(s0).is_cantor() {
            return Err(TorusError::Precondition(format!(
                "base point {s0} lies on the minimal set"
            )));
        }
    }
    let (mut s, mut plain, mut turned) = (s0, t, t);
    for n in 1..=DISPLACEMENT_BUDGET {
        plain = beta.eval(s, plain);
        turned = beta.eval(s, turned) + theta;
        s = beta.base().eval(s);
        if turned - plain > 1.0 {
            return Ok(n);
        }
    }
    Err(TorusError::BudgetExhausted {
        what: "displacement search",
        budget: DISPLACEMENT_BUDGET,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnPerturbation {
    #[serde(skip)]
    pub beta: FiberFamily,
    pub k: u64,
    /// The segment `(a, b)`, the middle half of gap `I_n`.
    pub gap_interval: (f64, f64),
    pub gap_index: i64,
    pub displacement_time: u64,
    pub theta: f64,
    /// Smallest override radius.
    pub radius: f64,
    /// `F'^k(b, t)₂ − F'^k(a, t)₂` in the lift.
    pub endpoint_separation: f64,
}

/// Fiber coordinate of `F^k(s, t)` in the lift.
fn fiber_lift(beta: &FiberFamily, s0: f64, t: f64, k: u64) -> f64 {
    let (mut s, mut y) = (s0, t);
    for _ in 0..k {
        y = beta.eval(s, y);
        s = beta.base().eval(s);
    }
    y
}

/// The middle half of gap `n`, if it lies in the open window around `s`.
fn middle_half_in_window(
    g1: &crate::circle::DenjoyMap,
    n: i64,
    s: f64,
    eps: f64,
) -> Option<(f64, f64)> {
    let g = g1.gap(n)?;
    let (a, b) = (g.left + 0.25 * g.length, g.left + 0.75 * g.length);
    (circle_distance(a, s) < eps && circle_distance(b, s) < eps).then_some((a, b))
}

/// Builds `β′` from `β` so that `f_{β′}^k(B(x, ε)) ∩ B(x, ε) ≠ ∅`.
///
/// The starting gap `I_n` is chosen among the `|n| ≤ 64` gaps whose middle
/// half lies in the window `(s − ε, s + ε)`; the one allowing the widest
/// override bumps wins. `β′ = R_θ ∘ β` at `b, g₁(b), …, g₁^k(b)` through
/// bumps centered there with radius `ℓ_{n+j}/8`. Gap maps are affine, so
/// `g₁^j(a)` and `g₁^j(b)` sit at relative positions `1/4` and `3/4` of
/// `I_{n+j}` and the bumps miss the orbit of `a` and the minimal set.
pub fn build_return_perturbation(
    beta: &FiberFamily,
    x: TorusPoint,
    eps: f64,
    delta: f64,
) -> Result<ReturnPerturbation, TorusError> {
    if !(eps > 0.0 && eps < 0.5) || !(delta > 0.0) {
        return Err(TorusError::InvalidParameter(format!(
            "need 0 < eps < 1/2 and delta > 0, got eps={eps}, delta={delta}"
        )));
    }
    let g1 = beta
        .base_denjoy()
        .ok_or_else(|| TorusError::Precondition("base map is not a Denjoy map".into()))?
        .clone();
    if !g1.gap_locate(x.s).is_cantor() {
        return Err(TorusError::Precondition(format!(
            "base coordinate {} is not on the minimal set",
            x.s
        )));
    }
    // strictly below delta so that the sup distance is < delta
    let theta = if delta > 0.05 { 0.05 } else { 0.5 * delta };
    let big_n = g1.truncation();

    let mut candidates: Vec<i64> =
        (-CANDIDATE_GAPS.min(big_n)..=CANDIDATE_GAPS.min(big_n)).collect();
    candidates.sort_by_key(|n| (n.abs(), *n));

    // (radius, gap index, n0, k, segment)
    #[allow(clippy::type_complexity)]
    let mut best: Option<(f64, i64, u64, u64, (f64, f64))> = None;
    let mut last_err = None;
    for n in candidates {
        let Some((a, b)) = middle_half_in_window(&g1, n, x.s, eps) else {
            continue;
        };
        let n0 = match find_displacement_time(beta, b, x.t, theta) {
            Ok(n0) => n0,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let Some(k) = (n0 as i64 + 1..=big_n - n)
            .find(|&k| middle_half_in_window(&g1, n + k, x.s, eps).is_some())
        else {
            continue;
        };
        let radius = (0..=k)
            .map(|j| g1.spec().gap_length(n + j) / 8.0)
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|b| radius > b.0) {
            best = Some((radius, n, k as u64, n0, (a, b)));
        }
    }
    let Some((radius, n, k, n0, (a, b))) = best else {
        return Err(last_err.unwrap_or(TorusError::NoGapInWindow {
            lo: x.s - eps,
            hi: x.s + eps,
        }));
    };
    if radius < MIN_BUMP_RADIUS {
        return Err(TorusError::RadiusTooSmall {
            radius,
            min: MIN_BUMP_RADIUS,
        });
    }

    let mut overrides = Vec::with_capacity(k as usize + 1);
    let mut sb = b;
    for j in 0..=k as i64 {
        overrides.push(FiberOverride {
            center: frac(sb),
            angle: theta,
            radius: g1.spec().gap_length(n + j) / 8.0,
        });
        sb = g1.eval(sb);
    }
    let beta_prime = beta.with_overrides(&overrides)?;

    let separation = fiber_lift(&beta_prime, b, x.t, k) - fiber_lift(&beta_prime, a, x.t, k);
    if !(separation > 1.0) {
        return Err(TorusError::Precondition(format!(
            "perturbed segment endpoints separate by only {separation} after {k} steps"
        )));
    }
    Ok(ReturnPerturbation {
        beta: beta_prime,
        k,
        gap_interval: (a, b),
        gap_index: n,
        displacement_time: n0,
        theta,
        radius,
        endpoint_separation: separation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnCheck {
    pub hit: bool,
    pub witness: Option<TorusPoint>,
    pub image: Option<TorusPoint>,
    /// Distance from the image of the witness to the center (or the best
    /// sampled near-miss when there is no hit).
    pub distance: f64,
    pub samples: usize,
}

fn lift_iterate(f: &SkewProduct, s: f64, t: f64, k: u64) -> (f64, f64) {
    (0..k).fold((s, t), |(s, t), _| f.lift_eval(s, t))
}

/// Scans horizontal sample lines `(t, u_lo, u_hi)` in order. Each sample is
/// tested directly; when the lifted fiber coordinate of the `k`-th image
/// crosses an integer level relative to the line height between two
/// neighbouring samples, the crossing (a point mapped exactly to the height
/// of its own line) is located by bisection and tested as well. The first
/// witness in sample order wins.
fn scan_lines(
    f: &SkewProduct,
    x: TorusPoint,
    eps: f64,
    k: u64,
    lines: &[(f64, f64, f64)],
    cols: usize,
) -> ReturnCheck {
    let dist_to_x = |p: (f64, f64)| circle_distance(p.0, x.s).hypot(circle_distance(p.1, x.t));
    let in_ball = |u: f64, t: f64| circle_distance(u, x.s).hypot(circle_distance(t, x.t)) < eps;
    let points: Vec<(usize, f64, f64)> = lines
        .iter()
        .enumerate()
        .flat_map(|(l, &(t, lo, hi))| {
            (0..cols).map(move |i| (l, lo + (hi - lo) * i as f64 / (cols - 1) as f64, t))
        })
        .collect();
    let images: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&(_, u, t)| lift_iterate(f, u, t, k))
        .collect();

    let found = (0..points.len()).into_par_iter().find_map_first(|i| {
        let (line, u0, t) = points[i];
        let p = images[i];
        if in_ball(u0, t) && dist_to_x(p) < eps {
            return Some((u0, t));
        }
        let (next_line, u1, _) = *points.get(i + 1)?;
        if next_line != line {
            return None;
        }
        let (h0, h1) = (p.1 - t, images[i + 1].1 - t);
        if h0.floor() == h1.floor() {
            return None;
        }
        let level = h0.floor().max(h1.floor());
        let below0 = h0 < level;
        let (mut lo, mut hi) = (u0, u1);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (lift_iterate(f, mid, t, k).1 - t < level) == below0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        [lo, hi]
            .into_iter()
            .find(|&u| in_ball(u, t) && dist_to_x(lift_iterate(f, u, t, k)) < eps)
            .map(|u| (u, t))
    });

    let samples = points.len();
    if let Some((u, t)) = found {
        // recheck with the torus map itself
        let w = TorusPoint::new(u, t);
        let img = f.iterate_torus(w, k);
        let d = img.distance(&x);
        if d < eps {
            return ReturnCheck {
                hit: true,
                witness: Some(w),
                image: Some(img),
                distance: d,
                samples,
            };
        }
    }
    let near = images
        .iter()
        .map(|&p| dist_to_x(p))
        .fold(f64::INFINITY, f64::min);
    ReturnCheck {
        hit: false,
        witness: None,
        image: None,
        distance: near,
        samples,
    }
}

/// Searches `B(x, ε)` for a point whose `k`-th image lands back in the ball,
/// sampling horizontal lines through the ball (center line first).
pub fn verify_return(
    f: &SkewProduct,
    x: TorusPoint,
    eps: f64,
    k: u64,
    samples: usize,
) -> ReturnCheck {
    assert!(k >= 1, "verify_return needs k >= 1");
    let samples = samples.max(4);
    let rows = ((samples as f64).sqrt().floor() as usize).clamp(1, 64);
    let cols = (samples / rows).max(2);
    let half_rows = rows.div_ceil(2) as f64;
    let lines: Vec<(f64, f64, f64)> = (0..rows)
        .map(|j| {
            let m = j.div_ceil(2) as f64;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let o = sign * 0.9 * eps * m / half_rows;
            let w = 0.999 * (eps * eps - o * o).sqrt();
            (x.t + o, x.s - w, x.s + w)
        })
        .collect();
    scan_lines(f, x, eps, k, &lines, cols)
}

/// Like [`verify_return`] but sampling only the horizontal segment
/// `(a, b) × {t}` through the center, which must lie in the ball.
pub fn verify_return_on_segment(
    f: &SkewProduct,
    x: TorusPoint,
    eps: f64,
    k: u64,
    segment: (f64, f64),
    samples: usize,
) -> ReturnCheck {
    assert!(k >= 1, "verify_return_on_segment needs k >= 1");
    scan_lines(f, x, eps, k, &[(x.t, segment.0, segment.1)], samples.max(2))
}
