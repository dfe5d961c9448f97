use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use super::{ChainError, ReturnOracle};
use crate::topology::BoxDomain;
use crate::torus::{Rect, SkewProduct, TorusPoint};

/// Largest number of sample points per box side before giving up refining.
const MAX_SAMPLES_PER_SIDE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakTransitivityHit {
    /// Least confirmed `n` with `f^n(U) ∩ V ≠ ∅`.
    pub n: u64,
    pub witness: TorusPoint,
    pub image: TorusPoint,
    pub samples_per_side: usize,
}

/// First `n ≤ limit` at which a sample of box `k` lands in `V`, checking
/// samples only while the iterated enclosure of the box meets a box of `V`.
fn first_confirmed(
    f: &SkewProduct,
    m: usize,
    k: usize,
    v: &BoxDomain,
    per_side: usize,
    limit: &AtomicU64,
) -> Option<(u64, TorusPoint, TorusPoint)> {
    let h = 1.0 / m as f64;
    let (i, j) = (k / m, k % m);
    let starts: Vec<TorusPoint> = (0..per_side)
        .flat_map(|a| {
            (0..per_side).map(move |b| {
                TorusPoint::new(
                    (i as f64 + (a as f64 + 0.5) / per_side as f64) * h,
                    (j as f64 + (b as f64 + 0.5) / per_side as f64) * h,
                )
            })
        })
        .collect();
    let mut pts = starts.clone();
    let mut rect = Some(Rect::cell(m, i, j));
    let mut n = 0u64;
    while n < limit.load(Ordering::Relaxed) {
        n += 1;
        for p in pts.iter_mut() {
            *p = f.eval(*p);
        }
        let meets = match rect {
            Some(r) => {
                let next = f.image_rect(&r);
                if next.width() >= 1.0 && next.height() >= 1.0 {
                    rect = None;
                    true
                } else {
                    rect = Some(next);
                    next.cells_within(m, 0.0)
                        .iter()
                        .any(|&c| v.contains_index(c as usize))
                }
            }
            None => true,
        };
        if !meets {
            continue;
        }
        if let Some(idx) = pts.iter().position(|p| v.contains_point(p.s, p.t)) {
            limit.fetch_min(n, Ordering::Relaxed);
            return Some((n, starts[idx], pts[idx]));
        }
    }
    None
}

/// Least `n ≤ n_max` for which some sample point of `U` is mapped into `V` by
/// `f^n`, using rectangle enclosures of the boxes of `U` to skip times at
/// which no hit is possible. When nothing is confirmed the samples per box
/// side are doubled, up to 32.
///
/// Both domains must meet the nonwandering over-approximation of `oracle`.
pub fn weak_transitivity_check(
    f: &SkewProduct,
    u: &BoxDomain,
    v: &BoxDomain,
    n_max: u64,
    oracle: &ReturnOracle<'_>,
) -> Result<WeakTransitivityHit, ChainError> {
    if u.m() != v.m() {
        return Err(ChainError::Precondition(
            "domains on different grids".into(),
        ));
    }
    if u.is_empty() || v.is_empty() {
        return Err(ChainError::EmptySet);
    }
    if oracle.m() != u.m() {
        return Err(ChainError::Precondition(
            "nonwandering oracle on a different grid".into(),
        ));
    }
    if !oracle.meets(u) || !oracle.meets(v) {
        return Err(ChainError::Precondition(
            "both domains must meet the nonwandering over-approximation".into(),
        ));
    }
    let m = u.m();
    let cells: Vec<usize> = u.indices().collect();
    let mut per_side = 2;
    while per_side <= MAX_SAMPLES_PER_SIDE {
        let limit = AtomicU64::new(n_max);
        let hits: Vec<Option<(u64, TorusPoint, TorusPoint)>> = cells
            .par_iter()
            .map(|&k| first_confirmed(f, m, k, v, per_side, &limit))
            .collect();
        // least n, ties broken by cell order
        if let Some((n, witness, image)) = hits.into_iter().flatten().min_by_key(|h| h.0) {
            return Ok(WeakTransitivityHit {
                n,
                witness,
                image,
                samples_per_side: per_side,
            });
        }
        per_side *= 2;
    }
    Err(ChainError::BudgetExhausted {
        what: "weak transitivity horizon",
        budget: n_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::rigid_translation;

    #[test]
    fn image_domain_hit_at_one() {
        let f = rigid_translation(0.618_033_988_749_894_8, 0.414_213_562_373_095_1);
        let m = 16;
        let u = BoxDomain::from_cells(m, [(2, 3)]).unwrap();
        let image = f.image_rect(&Rect::cell(m, 2, 3));
        let v = BoxDomain::from_indices(m, image.cells_within(m, 0.0)).unwrap();
        let oracle = ReturnOracle::new(&f, m, 1000);
        let hit = weak_transitivity_check(&f, &u, &v, 100, &oracle).unwrap();
        assert_eq!(hit.n, 1);
    }

    #[test]
    fn rejects_domains_off_the_returning_set() {
        let f = rigid_translation(0.25, 0.5);
        let m = 8;
        let u = BoxDomain::from_cells(m, [(0, 0)]).unwrap();
        let oracle = ReturnOracle::new(&f, m, 1);
        assert!(weak_transitivity_check(&f, &u, &u, 10, &oracle).is_err());
    }
}
