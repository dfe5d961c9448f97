use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::domain::neighbours8;
use super::holonomy::holonomy_subgroup;
use super::{classify_essentiality, BoxDomain, Essentiality, TopologyError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaptureDiameter {
    /// Largest diameter of a lifted complement component.
    pub k: f64,
    /// Number of complement components (8-adjacency).
    pub components: usize,
}

/// Diameter of one lift of an 8-connected set of closed cells with trivial
/// holonomy, in units of the unit square.
fn lifted_diameter(comp: &BoxDomain) -> f64 {
    let m = comp.m();
    let mi = m as i64;
    let start = comp.indices().next().unwrap();
    let mut pos: Vec<Option<(i64, i64)>> = vec![None; m * m];
    pos[start] = Some(((start / m) as i64, (start % m) as i64));
    let mut queue = VecDeque::from([start]);
    // corner rows y ↦ (leftmost x, rightmost x); the diameter of the union is
    // attained between extreme corners of rows
    let mut rows: BTreeMap<i64, (i64, i64)> = BTreeMap::new();
    while let Some(k) = queue.pop_front() {
        let (x, y) = pos[k].unwrap();
        for row in [y, y + 1] {
            let e = rows.entry(row).or_insert((x, x + 1));
            e.0 = e.0.min(x);
            e.1 = e.1.max(x + 1);
        }
        for (a, b, (dp, dq)) in neighbours8(m, k / m, k % m) {
            let idx = a * m + b;
            if comp.contains_index(idx) && pos[idx].is_none() {
                let (pa, pb) = (
                    x + (a as i64 - (k / m) as i64) + dp * mi,
                    y + (b as i64 - (k % m) as i64) + dq * mi,
                );
                pos[idx] = Some((pa, pb));
                queue.push_back(idx);
            }
        }
    }
    let pts: Vec<(i64, i64)> = rows
        .iter()
        .flat_map(|(&y, &(l, r))| [(l, y), (r, y)])
        .collect();
    let mut best = 0i64;
    for (n, &(x0, y0)) in pts.iter().enumerate() {
        for &(x1, y1) in &pts[n + 1..] {
            best = best.max((x1 - x0).pow(2) + (y1 - y0).pow(2));
        }
    }
    (best as f64).sqrt() / m as f64
}

/// The threshold `K` beyond which every connected subset of the plane meets
/// the lift of `u`: the largest diameter of a lifted component of the closed
/// complement. Components are taken under 8-adjacency; a component with
/// nontrivial holonomy is unbounded in the plane and makes `K` undefined.
pub fn compute_capture_diameter(u: &BoxDomain) -> Result<CaptureDiameter, TopologyError> {
    let class = classify_essentiality(u)?.class;
    if class != Essentiality::DoublyEssential {
        return Err(TopologyError::NotDoublyEssential(class));
    }
    let comps = u.complement().components8();
    let mut k: f64 = 0.0;
    for comp in &comps {
        let lattice = holonomy_subgroup(comp, true, None);
        if lattice.rank() > 0 {
            return Err(TopologyError::UnboundedComplement(lattice.basis()[0]));
        }
        k = k.max(lifted_diameter(comp));
    }
    Ok(CaptureDiameter {
        k,
        components: comps.len(),
    })
}
