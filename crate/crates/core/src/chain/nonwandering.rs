use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use crate::topology::BoxDomain;
use crate::torus::{Rect, SkewProduct, TorusPoint};

/// Partition of the grid into boxes whose rectangle enclosures come back
/// within the horizon and boxes certified never to come back.
#[derive(Debug, Clone)]
pub struct NonwanderingApprox {
    pub m: usize,
    pub n_max: u64,
    pub returning: BoxDomain,
    pub nonreturning: BoxDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NonwanderingSummary {
    pub m: usize,
    pub n_max: u64,
    pub returning: usize,
    pub nonreturning: usize,
}

impl NonwanderingApprox {
    pub fn summary(&self) -> NonwanderingSummary {
        NonwanderingSummary {
            m: self.m,
            n_max: self.n_max,
            returning: self.returning.len(),
            nonreturning: self.nonreturning.len(),
        }
    }
}

/// First `n ∈ 1..=n_max` at which the iterated enclosure of box `k` meets the
/// box again.
pub fn first_return(f: &SkewProduct, m: usize, k: usize, n_max: u64) -> Option<u64> {
    let cell = Rect::cell(m, k / m, k % m);
    let mut r = cell;
    for n in 1..=n_max {
        r = f.image_rect(&r);
        if (r.width() >= 1.0 && r.height() >= 1.0) || r.meets_on_torus(&cell) {
            return Some(n);
        }
    }
    None
}

pub fn nonwandering_approx(f: &SkewProduct, m: usize, n_max: u64) -> NonwanderingApprox {
    assert!(n_max >= 1, "nonwandering_approx needs n_max >= 1");
    let flags: Vec<bool> = (0..m * m)
        .into_par_iter()
        .map(|k| first_return(f, m, k, n_max).is_some())
        .collect();
    let returning =
        BoxDomain::from_indices(m, (0..m * m).filter(|&k| flags[k]).map(|k| k as u32)).unwrap();
    NonwanderingApprox {
        m,
        n_max,
        nonreturning: returning.complement(),
        returning,
    }
}

/// Lazily evaluated, cached membership in the returning set.
pub struct ReturnOracle<'a> {
    f: &'a SkewProduct,
    m: usize,
    n_max: u64,
    cache: Vec<OnceLock<bool>>,
}

impl<'a> ReturnOracle<'a> {
    pub fn new(f: &'a SkewProduct, m: usize, n_max: u64) -> Self {
        Self {
            f,
            m,
            n_max,
            cache: (0..m * m).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_returning(&self, k: usize) -> bool {
        *self.cache[k].get_or_init(|| first_return(self.f, self.m, k, self.n_max).is_some())
    }

    /// Is some returning box at torus distance `< r` from `p`?
    pub fn near(&self, p: TorusPoint, r: f64) -> bool {
        Rect {
            s: (p.s, p.s),
            t: (p.t, p.t),
        }
        .cells_within(self.m, r)
        .into_iter()
        .any(|k| self.is_returning(k as usize))
    }

    /// Does the domain contain a returning box?
    pub fn meets(&self, d: &BoxDomain) -> bool {
        assert_eq!(d.m(), self.m, "grid mismatch");
        d.indices().any(|k| self.is_returning(k))
    }
}
