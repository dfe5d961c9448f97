//! Image of `π₁` of a box domain in `π₁(T²) = ℤ²`, read off from the deck
//! vectors accumulated along fundamental cycles of a spanning tree.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::domain::{neighbours4, neighbours8};
use super::{BoxDomain, TopologyError};

/// The plane translation `T_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DeckVector {
    pub p: i64,
    pub q: i64,
}

impl DeckVector {
    pub const fn new(p: i64, q: i64) -> Self {
        Self { p, q }
    }

    pub fn is_zero(&self) -> bool {
        self.p == 0 && self.q == 0
    }

    pub fn is_primitive(&self) -> bool {
        gcd(self.p, self.q) == 1
    }
}

impl std::ops::Add for DeckVector {
    type Output = DeckVector;
    fn add(self, o: DeckVector) -> DeckVector {
        DeckVector::new(self.p + o.p, self.q + o.q)
    }
}

impl std::ops::Sub for DeckVector {
    type Output = DeckVector;
    fn sub(self, o: DeckVector) -> DeckVector {
        DeckVector::new(self.p - o.p, self.q - o.q)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(g, x, y)` with `x·a + y·b = g = gcd(a, b) ≥ 0`.
fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// A subgroup of `ℤ²` kept in Hermite normal form: rows `(a, b)` and
/// `(0, c)` with `a, c ≥ 0`, `0 ≤ b < c` when `c > 0`, and `b = 0` when `a = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Lattice {
    a: i64,
    b: i64,
    c: i64,
}

impl Lattice {
    pub fn insert(&mut self, v: DeckVector) {
        let (x, y) = (v.p, v.q);
        if x == 0 {
            self.c = gcd(self.c, y);
        } else if self.a == 0 {
            let s = x.signum();
            self.a = s * x;
            self.b = s * y;
        } else {
            let (g, p, q) = egcd(self.a, x);
            let leftover = (x / g) * self.b - (self.a / g) * y;
            let b = p * self.b + q * y;
            self.a = g;
            self.b = b;
            self.c = gcd(self.c, leftover);
        }
        if self.c > 0 {
            self.b = self.b.rem_euclid(self.c);
        }
    }

    pub fn rank(&self) -> usize {
        (self.a != 0) as usize + (self.c != 0) as usize
    }

    pub fn basis(&self) -> Vec<DeckVector> {
        let mut out = Vec::with_capacity(2);
        if self.a != 0 {
            out.push(DeckVector::new(self.a, self.b));
        }
        if self.c != 0 {
            out.push(DeckVector::new(0, self.c));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Essentiality {
    Inessential,
    SimplyEssential,
    DoublyEssential,
}

impl Essentiality {
    fn from_rank(rank: usize) -> Self {
        match rank {
            0 => Essentiality::Inessential,
            1 => Essentiality::SimplyEssential,
            _ => Essentiality::DoublyEssential,
        }
    }
}

impl std::fmt::Display for Essentiality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Essentiality::Inessential => "inessential",
            Essentiality::SimplyEssential => "simply-essential",
            Essentiality::DoublyEssential => "doubly-essential",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EssentialityResult {
    pub class: Essentiality,
    /// Hermite basis of the holonomy subgroup of the achieving component.
    pub basis: Vec<DeckVector>,
    /// Number of 4-connected components of the domain.
    pub components: usize,
    /// Position of the achieving component among them.
    pub component_index: usize,
    #[serde(skip)]
    pub component: BoxDomain,
}

/// Holonomy subgroup of one connected component. A seed randomizes the root
/// and the neighbour order of the breadth-first spanning tree.
pub(crate) fn holonomy_subgroup(comp: &BoxDomain, diagonal: bool, seed: Option<u64>) -> Lattice {
    let m = comp.m();
    let cells: Vec<usize> = comp.indices().collect();
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let root = match rng.as_mut() {
        Some(r) => cells[r.gen_range(0..cells.len())],
        None => cells[0],
    };
    let mut lift: Vec<Option<DeckVector>> = vec![None; m * m];
    let mut lattice = Lattice::default();
    lift[root] = Some(DeckVector::new(0, 0));
    let mut queue = VecDeque::from([root]);
    while let Some(k) = queue.pop_front() {
        let here = lift[k].unwrap();
        let (i, j) = (k / m, k % m);
        let mut nbrs: Vec<(usize, usize, (i64, i64))> = if diagonal {
            neighbours8(m, i, j)
        } else {
            neighbours4(m, i, j).to_vec()
        };
        if let Some(r) = rng.as_mut() {
            nbrs.shuffle(r);
        }
        for (a, b, (dp, dq)) in nbrs {
            let idx = a * m + b;
            if !comp.contains_index(idx) {
                continue;
            }
            let arrive = here + DeckVector::new(dp, dq);
            match lift[idx] {
                None => {
                    lift[idx] = Some(arrive);
                    queue.push_back(idx);
                }
                Some(existing) => lattice.insert(arrive - existing),
            }
        }
    }
    lattice
}

fn classify_impl(
    domain: &BoxDomain,
    seed: Option<u64>,
) -> Result<EssentialityResult, TopologyError> {
    if domain.is_empty() {
        return Err(TopologyError::EmptyDomain);
    }
    let comps = domain.components();
    let mut best: Option<(Essentiality, Vec<DeckVector>, usize)> = None;
    for (idx, comp) in comps.iter().enumerate() {
        let lattice = holonomy_subgroup(comp, false, seed.map(|s| s.wrapping_add(idx as u64)));
        let class = Essentiality::from_rank(lattice.rank());
        let basis = lattice.basis();
        if class == Essentiality::SimplyEssential && !basis[0].is_primitive() {
            return Err(TopologyError::NonPrimitive(basis[0]));
        }
        if best.as_ref().is_none_or(|b| class > b.0) {
            best = Some((class, basis, idx));
        }
    }
    let (class, basis, component_index) = best.unwrap();
    Ok(EssentialityResult {
        class,
        basis,
        components: comps.len(),
        component_index,
        component: comps[component_index].clone(),
    })
}

/// Inessential, simply essential or doubly essential according to the rank of
/// the holonomy subgroup; for disconnected domains the maximal class over
/// components is reported together with the component achieving it.
pub fn classify_essentiality(domain: &BoxDomain) -> Result<EssentialityResult, TopologyError> {
    classify_impl(domain, None)
}

/// Same as [`classify_essentiality`] with a randomized spanning tree.
pub fn classify_essentiality_seeded(
    domain: &BoxDomain,
    seed: u64,
) -> Result<EssentialityResult, TopologyError> {
    classify_impl(domain, Some(seed))
}

/// Whether two doubly essential domains share a cell. Refuses domains that are
/// not doubly essential.
pub fn essential_intersection_check(u: &BoxDomain, v: &BoxDomain) -> Result<bool, TopologyError> {
    if u.m() != v.m() {
        return Err(TopologyError::GridMismatch {
            left: u.m(),
            right: v.m(),
        });
    }
    for d in [u, v] {
        let class = classify_essentiality(d)?.class;
        if class != Essentiality::DoublyEssential {
            return Err(TopologyError::NotDoublyEssential(class));
        }
    }
    u.intersects(v)
}
