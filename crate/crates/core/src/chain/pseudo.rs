//! `ε`-pseudo-orbits and the two-jump construction: follow `x` forward and
//! `y` backward until both sit near the nonwandering set, then bridge the gap
//! with one genuine orbit segment.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ChainError, ReturnOracle};
use crate::torus::{SkewProduct, TorusPoint};

/// Step errors above this count as jumps.
pub const JUMP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOrbit {
    pub epsilon: f64,
    pub points: Vec<TorusPoint>,
    /// Indices `i` with `d(f(z_i), z_{i+1}) > 1e-9` as recorded by the builder.
    pub jumps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoOrbitCheck {
    pub valid: bool,
    pub jump_count: usize,
    pub jumps: Vec<usize>,
    pub max_step_error: f64,
}

/// Recomputes every step error `d(f(z_i), z_{i+1})`.
pub fn validate_pseudo_orbit(f: &SkewProduct, po: &PseudoOrbit) -> PseudoOrbitCheck {
    let errors: Vec<f64> = po
        .points
        .par_windows(2)
        .map(|w| f.eval(w[0]).distance(&w[1]))
        .collect();
    let jumps: Vec<usize> = errors
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > JUMP_TOLERANCE)
        .map(|(i, _)| i)
        .collect();
    let max_step_error = errors.iter().copied().fold(0.0, f64::max);
    PseudoOrbitCheck {
        valid: po.points.len() >= 2 && errors.iter().all(|&e| e < po.epsilon),
        jump_count: jumps.len(),
        jumps,
        max_step_error,
    }
}

impl PseudoOrbit {
    /// Number of steps `n` (points minus one).
    pub fn steps(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    /// Header lines `epsilon`, `n` and `jumps`, then one `s t` line per point
    /// with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "epsilon {:.16e}", self.epsilon).unwrap();
        writeln!(out, "n {}", self.steps()).unwrap();
        let jumps: Vec<String> = self.jumps.iter().map(|j| j.to_string()).collect();
        writeln!(out, "jumps {}", jumps.join(" ")).unwrap();
        for p in &self.points {
            writeln!(out, "{:.16e} {:.16e}", p.s, p.t).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ChainError> {
        let bad = |m: String| ChainError::Parse(m);
        let mut lines = text.lines();
        let mut field = |name: &str| -> Result<String, ChainError> {
            let line = lines
                .next()
                .ok_or_else(|| bad(format!("missing {name} line")))?;
            let rest = line
                .strip_prefix(name)
                .ok_or_else(|| bad(format!("expected {name}, got {line:?}")))?;
            Ok(rest.trim().to_string())
        };
        let epsilon: f64 = field("epsilon")?
            .parse()
            .map_err(|e| bad(format!("epsilon: {e}")))?;
        let n: usize = field("n")?.parse().map_err(|e| bad(format!("n: {e}")))?;
        let jumps = field("jumps")?
            .split_whitespace()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|e| bad(format!("jump index: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut points = Vec::with_capacity(n + 1);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(s)), Some(Ok(t)), None) => points.push(TorusPoint { s, t }),
                _ => return Err(bad(format!("bad point line {line:?}"))),
            }
        }
        if points.len() != n + 1 {
            return Err(bad(format!(
                "header says n={n} but {} points follow",
                points.len()
            )));
        }
        Ok(Self {
            epsilon,
            points,
            jumps,
        })
    }
}

/// Most `n₀` candidates tried before giving up.
const MAX_N0_CANDIDATES: usize = 12;
/// Connector budget for every candidate but the last.
const PROBE_SAMPLES: usize = 64;
const PROBE_ORBIT: u64 = 100_000;

/// Search limits for [`two_jump_pseudo_orbit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoJumpBudgets {
    /// Grid of the nonwandering over-approximation.
    pub omega_grid: usize,
    /// Horizon of the nonwandering over-approximation.
    pub omega_horizon: u64,
    /// Longest forward/backward walk when looking for `n₀`.
    pub max_n0: u64,
    /// Most sample points in the connector ball.
    pub connector_samples: usize,
    /// Longest connector orbit.
    pub connector_orbit: u64,
}

impl Default for TwoJumpBudgets {
    fn default() -> Self {
        Self {
            omega_grid: 256,
            omega_horizon: 10_000,
            max_n0: 100_000,
            connector_samples: 4096,
            connector_orbit: 1_000_000,
        }
    }
}

/// Diagnostic counters of a successful construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoJumpInfo {
    pub n0: u64,
    /// Length `n + 1` of the connector orbit from `z` to the landing point.
    pub connector_steps: u64,
    pub samples_tried: usize,
    pub orbit_shortcut: bool,
}

/// Forward iterates up to `max_steps` looking for `y` itself (up to rounding).
fn orbit_hits(
    f: &SkewProduct,
    x: TorusPoint,
    y: TorusPoint,
    max_steps: u64,
) -> Option<Vec<TorusPoint>> {
    let mut pts = vec![x];
    let mut p = x;
    for _ in 0..max_steps {
        p = f.eval(p);
        if p.distance(&y) <= 1e-12 {
            pts.push(y);
            return Some(pts);
        }
        pts.push(p);
    }
    None
}

/// Sample points of the dyadic grid of level `level` in the disk of radius
/// `r` around `c` that are new at this level (level 0 is the center).
fn dyadic_ball_samples(c: TorusPoint, r: f64, level: u32) -> Vec<TorusPoint> {
    if level == 0 {
        return vec![c];
    }
    let n = 1i64 << level;
    let mut out = Vec::new();
    for a in -n..=n {
        for b in -n..=n {
            // skip points of coarser levels
            if a % 2 == 0 && b % 2 == 0 {
                continue;
            }
            let (u, v) = (a as f64 / n as f64, b as f64 / n as f64);
            if u * u + v * v < 0.98 {
                out.push(TorusPoint::new(c.s + r * u, c.t + r * v));
            }
        }
    }
    out
}

/// Searches dyadic samples of `B(start, reach)` for a point whose orbit
/// enters `B(target, reach)` within `max_orbit` steps. Returns the first
/// such sample in sample order with its step count and the number of samples
/// used, or the nearest miss.
fn find_connector(
    f: &SkewProduct,
    start: TorusPoint,
    target: TorusPoint,
    reach: f64,
    max_samples: usize,
    max_orbit: u64,
) -> Result<(TorusPoint, u64, usize), (f64, usize)> {
    let mut tried = 0usize;
    let mut best_miss = f64::INFINITY;
    let mut level = 0;
    loop {
        let mut samples = dyadic_ball_samples(start, reach, level);
        samples.truncate(max_samples.saturating_sub(tried));
        if samples.is_empty() {
            return Err((best_miss, tried));
        }
        tried += samples.len();
        // samples after the earliest known hit give up early
        let earliest = AtomicUsize::new(usize::MAX);
        let outcomes: Vec<Result<(TorusPoint, u64), f64>> = samples
            .par_iter()
            .enumerate()
            .map(|(idx, &z)| {
                let mut p = z;
                let mut best = f64::INFINITY;
                for step in 1..=max_orbit {
                    if step % 1024 == 0 && earliest.load(Ordering::Relaxed) < idx {
                        break;
                    }
                    p = f.eval(p);
                    let d = p.distance(&target);
                    if d < reach {
                        earliest.fetch_min(idx, Ordering::Relaxed);
                        return Ok((z, step));
                    }
                    best = best.min(d);
                }
                Err(best)
            })
            .collect();
        if let Some(&(z, steps)) = outcomes.iter().find_map(|o| o.as_ref().ok()) {
            return Ok((z, steps, tried));
        }
        best_miss = outcomes
            .iter()
            .filter_map(|o| o.as_ref().err())
            .fold(best_miss, |a, &b| a.min(b));
        level += 1;
    }
}

/// Builds an `ε`-pseudo-orbit from `x` to `y` with at most two jumps:
/// `x, …, f^{n₀−1}(x), z, …, f^n(z), f^{−n₀}(y), …, y`.
pub fn two_jump_pseudo_orbit(
    f: &SkewProduct,
    x: TorusPoint,
    y: TorusPoint,
    epsilon: f64,
    budgets: &TwoJumpBudgets,
) -> Result<(PseudoOrbit, TwoJumpInfo), ChainError> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(ChainError::Precondition(format!(
            "epsilon {epsilon} outside (0, 1/2)"
        )));
    }
    if let Some(points) = orbit_hits(f, x, y, budgets.max_n0.min(10_000)) {
        let po = PseudoOrbit {
            epsilon,
            points,
            jumps: Vec::new(),
        };
        let steps = po.steps() as u64;
        return Ok((
            po,
            TwoJumpInfo {
                n0: 0,
                connector_steps: steps,
                samples_tried: 0,
                orbit_shortcut: true,
            },
        ));
    }

    let oracle = ReturnOracle::new(f, budgets.omega_grid, budgets.omega_horizon);
    // Candidates n₀ ≥ 1 with f^{n₀+1}(x) and f^{−n₀}(y) within ε/2 of the
    // returning boxes: the first such n, then the next one past each doubling.
    // The box over-approximation can be loose, so every candidate but the last
    // gets only a cheap connector probe.
    let mut forward = vec![x, f.eval(x)];
    let mut backward = vec![y];
    let reach = 0.98 * epsilon;
    let mut tried = 0usize;
    let mut best_miss = f64::INFINITY;
    let mut found = None;
    let mut n = 0u64;
    let mut last_candidate: Option<u64> = None;
    let mut candidates = 0;
    while n < budgets.max_n0 && candidates < MAX_N0_CANDIDATES {
        n += 1;
        let next = f.eval(*forward.last().unwrap());
        forward.push(next);
        let prev = f.inverse(*backward.last().unwrap())?;
        backward.push(prev);
        let due = last_candidate.is_none_or(|c| n >= 2 * c);
        if !(due
            && oracle.near(forward[n as usize + 1], 0.5 * epsilon)
            && oracle.near(backward[n as usize], 0.5 * epsilon))
        {
            continue;
        }
        last_candidate = Some(n);
        candidates += 1;
        let last = candidates == MAX_N0_CANDIDATES || 2 * n > budgets.max_n0;
        let (samples, orbit) = if last {
            (budgets.connector_samples, budgets.connector_orbit)
        } else {
            (
                PROBE_SAMPLES.min(budgets.connector_samples),
                PROBE_ORBIT.min(budgets.connector_orbit),
            )
        };
        // connector z ∈ B(f^{n₀}(x), ε) with f^{n+1}(z) ∈ B(f^{−n₀}(y), ε)
        match find_connector(
            f,
            forward[n as usize],
            backward[n as usize],
            reach,
            samples,
            orbit,
        ) {
            Ok((z, steps, used)) => {
                tried += used;
                found = Some((n, z, steps));
                break;
            }
            Err((best, used)) => {
                tried += used;
                best_miss = best_miss.min(best);
            }
        }
    }
    if last_candidate.is_none() {
        return Err(ChainError::BudgetExhausted {
            what: "nonwandering approach time",
            budget: budgets.max_n0,
        });
    }
    let (n0, z, connector_steps) = found.ok_or(ChainError::ConnectorExhausted {
        best_distance: best_miss,
        samples: tried,
        orbit: budgets.connector_orbit,
    })?;

    let mut points: Vec<TorusPoint> = forward[..n0 as usize].to_vec();
    let first_jump = points.len() - 1;
    let mut p = z;
    points.push(p);
    for _ in 1..connector_steps {
        p = f.eval(p);
        points.push(p);
    }
    let second_jump = points.len() - 1;
    points.extend(backward[..=n0 as usize].iter().rev());
    let po = PseudoOrbit {
        epsilon,
        jumps: vec![first_jump, second_jump],
        points,
    };
    let check = validate_pseudo_orbit(f, &po);
    if !check.valid || check.jump_count > 2 {
        return Err(ChainError::Precondition(format!(
            "assembled pseudo-orbit failed validation: {check:?}"
        )));
    }
    let po = PseudoOrbit {
        jumps: check.jumps,
        ..po
    };
    Ok((
        po,
        TwoJumpInfo {
            n0,
            connector_steps,
            samples_tried: tried,
            orbit_shortcut: false,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::rigid_translation;

    fn golden() -> SkewProduct {
        rigid_translation(0.618_033_988_749_894_8, 0.414_213_562_373_095_1)
    }

    #[test]
    fn genuine_orbit_has_no_jumps() {
        let f = golden();
        let mut pts = vec![TorusPoint::new(0.1, 0.2)];
        for _ in 0..20 {
            pts.push(f.eval(*pts.last().unwrap()));
        }
        let po = PseudoOrbit {
            epsilon: 0.01,
            points: pts.clone(),
            jumps: vec![],
        };
        let c = validate_pseudo_orbit(&f, &po);
        assert!(c.valid && c.jump_count == 0);

        let mut teleport = pts.clone();
        teleport[10] = TorusPoint::new(teleport[10].s + 0.005, teleport[10].t);
        for k in 10..20 {
            teleport[k + 1] = f.eval(teleport[k]);
        }
        let c = validate_pseudo_orbit(
            &f,
            &PseudoOrbit {
                epsilon: 0.01,
                points: teleport,
                jumps: vec![],
            },
        );
        assert!(c.valid);
        assert_eq!(c.jumps, vec![9]);

        let mut far = pts;
        far[5] = TorusPoint::new(far[5].s + 0.02, far[5].t);
        assert!(
            !validate_pseudo_orbit(
                &f,
                &PseudoOrbit {
                    epsilon: 0.01,
                    points: far,
                    jumps: vec![]
                }
            )
            .valid
        );
    }

    #[test]
    fn text_round_trip_is_exact() {
        let po = PseudoOrbit {
            epsilon: 0.05,
            points: vec![
                TorusPoint::new(0.1, 1.0 / 3.0),
                TorusPoint::new(std::f64::consts::FRAC_1_PI, 0.999_999_999_999),
            ],
            jumps: vec![0],
        };
        let back = PseudoOrbit::from_text(&po.to_text()).unwrap();
        assert_eq!(back, po);
        assert!(PseudoOrbit::from_text("epsilon 0.1\nn 3\njumps\n0 0\n").is_err());
    }

    #[test]
    fn orbit_endpoint_shortcut() {
        let f = golden();
        let x = TorusPoint::new(0.3, 0.7);
        let y = f.iterate_torus(x, 10);
        let (po, info) = two_jump_pseudo_orbit(&f, x, y, 0.05, &TwoJumpBudgets::default()).unwrap();
        assert!(info.orbit_shortcut);
        assert_eq!(po.points.len(), 11);
        assert_eq!(validate_pseudo_orbit(&f, &po).jump_count, 0);
    }

    #[test]
    fn rigid_two_jumps() {
        let f = golden();
        let budgets = TwoJumpBudgets {
            omega_grid: 32,
            omega_horizon: 2000,
            ..Default::default()
        };
        let (po, _) = two_jump_pseudo_orbit(
            &f,
            TorusPoint::new(0.1, 0.9),
            TorusPoint::new(0.55, 0.35),
            0.05,
            &budgets,
        )
        .unwrap();
        let c = validate_pseudo_orbit(&f, &po);
        assert!(c.valid && c.jump_count <= 2, "{c:?}");
        assert_eq!(po.points[0], TorusPoint::new(0.1, 0.9));
        assert_eq!(*po.points.last().unwrap(), TorusPoint::new(0.55, 0.35));
    }
}
