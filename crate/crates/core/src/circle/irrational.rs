//! Quadratic-irrational rotation numbers and heuristic irrationality checks.
//!
//! Floating point cannot certify irrationality; the checks here only flag
//! values that sit suspiciously close to rationals with small denominators.

use serde::{Deserialize, Serialize};

/// The real number `(a + b·√c) / d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticIrrational {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl QuadraticIrrational {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self { a, b, c, d }
    }

    /// `(√5 − 1) / 2`.
    pub const fn golden() -> Self {
        Self::new(-1, 1, 5, 2)
    }

    /// `√2 − 1`.
    pub const fn silver() -> Self {
        Self::new(-1, 1, 2, 1)
    }

    pub fn value(&self) -> f64 {
        (self.a as f64 + self.b as f64 * (self.c as f64).sqrt()) / self.d as f64
    }

    /// True when `c` is a positive non-square and `b`, `d` are non-zero, i.e.
    /// the descriptor names an honest quadratic irrational.
    pub fn is_irrational(&self) -> bool {
        if self.b == 0 || self.d == 0 || self.c <= 1 {
            return false;
        }
        let r = (self.c as f64).sqrt().round() as i64;
        (r - 1..=r + 1).all(|k| k * k != self.c)
    }
}

impl std::fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} + {}·√{})/{}", self.a, self.b, self.c, self.d)
    }
}

/// Partial quotients of the continued fraction of `x`, stopping once the
/// convergent denominator exceeds `max_denominator`.
pub fn continued_fraction(x: f64, max_denominator: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut r = x;
    // q_{k-2}, q_{k-1}
    let (mut q2, mut q1) = (0u64, 1u64);
    for _ in 0..64 {
        let a = r.floor();
        if !(0.0..=1e15).contains(&a) {
            break;
        }
        let a_int = a as u64;
        out.push(a_int);
        if out.len() > 1 {
            let q = a_int.saturating_mul(q1).saturating_add(q2);
            q2 = q1;
            q1 = q;
            if q > max_denominator {
                break;
            }
        }
        let f = r - a;
        if f < 1e-15 {
            break;
        }
        r = 1.0 / f;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IrrationalityReport {
    pub value: f64,
    pub partial_quotients: Vec<u64>,
    pub max_partial_quotient: u64,
    /// Raised when a partial quotient beyond the leading term is huge, which
    /// is how a float that "is" a small-denominator rational shows up.
    pub suspicious: bool,
}

/// Continued-fraction heuristic on denominators up to `max_denominator`.
pub fn irrationality_report(x: f64, max_denominator: u64) -> IrrationalityReport {
    let pq = continued_fraction(x, max_denominator);
    let max_pq = pq.iter().skip(1).copied().max().unwrap_or(0);
    let terminated_early = {
        // a finite expansion that stops before the denominator cap means x is
        // (numerically) rational
        let mut q_prev = 0u64;
        let mut q = 1u64;
        for &a in pq.iter().skip(1) {
            let n = a.saturating_mul(q).saturating_add(q_prev);
            q_prev = q;
            q = n;
        }
        q <= max_denominator
    };
    IrrationalityReport {
        value: x,
        max_partial_quotient: max_pq,
        suspicious: terminated_early || max_pq > 10_000,
        partial_quotients: pq,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub search_bound: i64,
    /// Smallest `|k0 + k1·a + k2·b|` over non-zero integer triples within the bound.
    pub min_residual: f64,
    pub witness: (i64, i64, i64),
    pub suspicious: bool,
}

/// Brute-force search for a small integer relation `k0 + k1·a + k2·b ≈ 0`.
pub fn independence_check(a: f64, b: f64, bound: i64) -> IndependenceReport {
    let mut best = f64::INFINITY;
    let mut witness = (0, 0, 0);
    for k1 in -bound..=bound {
        for k2 in -bound..=bound {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let v = k1 as f64 * a + k2 as f64 * b;
            let k0 = -v.round();
            let r = (v + k0).abs();
            if r < best {
                best = r;
                witness = (k0 as i64, k1, k2);
            }
        }
    }
    IndependenceReport {
        search_bound: bound,
        min_residual: best,
        witness,
        suspicious: best < 1e-10,
    }
}
