use rayon::prelude::*;

use super::BoxDomain;
use crate::torus::{Rect, SkewProduct};

/// Union of the cell covers of the outer enclosures of `f^n(U₀)`,
/// `1 ≤ n ≤ n_max`. Covers of images of single cells are unioned, so the
/// result is the set of cells reachable from `U₀` in `1..=n_max` steps of the
/// enclosure relation; the iteration stops once no new cell appears.
pub fn forward_invariant_hull(f: &SkewProduct, u0: &BoxDomain, n_max: u64) -> BoxDomain {
    assert!(n_max >= 1, "forward_invariant_hull needs n_max >= 1");
    let m = u0.m();
    let successors = |cells: &[usize]| -> Vec<u32> {
        let mut out: Vec<u32> = cells
            .par_iter()
            .flat_map_iter(|&k| {
                f.image_rect(&Rect::cell(m, k / m, k % m))
                    .cells_within(m, 0.0)
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let mut hull = BoxDomain::empty(m);
    let mut frontier: Vec<usize> = u0.indices().collect();
    for _ in 0..n_max {
        let next: Vec<usize> = successors(&frontier)
            .into_iter()
            .map(|k| k as usize)
            .filter(|&k| !hull.contains_index(k))
            .collect();
        if next.is_empty() {
            break;
        }
        for &k in &next {
            hull.insert(k / m, k % m);
        }
        frontier = next;
    }
    hull
}
