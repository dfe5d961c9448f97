use std::collections::VecDeque;
use std::io::{self, Write};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ChainError;
use crate::torus::{Rect, SkewProduct, ENCLOSURE_PAD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnclosureMode {
    /// Images of `k × k` sample points per box.
    Sampled { per_side: usize },
    /// Rectangle enclosures from the skew structure.
    OuterBound,
}

/// Box-to-box transitions: `B → B′` iff the `ε`-fattened enclosure of `f(B)`
/// meets `B′` (torus distance `< ε`). Stored in compressed-row form.
#[derive(Debug, Clone)]
pub struct TransitionGraph {
    m: usize,
    epsilon: f64,
    mode: EnclosureMode,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

/// Summary of a graph build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub m: usize,
    pub epsilon: f64,
    pub mode: EnclosureMode,
    pub edges: usize,
    pub min_out_degree: usize,
    pub max_out_degree: usize,
    /// Padding added to every enclosure, beyond the exact `φ` range.
    pub margin: f64,
}

/// Cells at torus distance `< ε` from the point `(s, t)`.
fn cells_near_point(m: usize, s: f64, t: f64, eps: f64) -> Vec<u32> {
    Rect {
        s: (s, s),
        t: (t, t),
    }
    .cells_within(m, eps)
}

/// `ε ≥ √2/m`, the diameter of a box.
pub fn check_epsilon(m: usize, epsilon: f64) -> Result<(), ChainError> {
    let min = std::f64::consts::SQRT_2 / m as f64;
    if !(epsilon.is_finite() && epsilon >= min * (1.0 - 1e-12)) {
        return Err(ChainError::InvalidEpsilon { epsilon, min });
    }
    Ok(())
}

pub fn build_transition_graph(
    f: &SkewProduct,
    m: usize,
    epsilon: f64,
    mode: EnclosureMode,
) -> Result<TransitionGraph, ChainError> {
    if m == 0 || m > u16::MAX as usize {
        return Err(ChainError::Precondition(format!(
            "grid resolution {m} out of range"
        )));
    }
    check_epsilon(m, epsilon)?;
    if let EnclosureMode::Sampled { per_side } = mode {
        if per_side == 0 {
            return Err(ChainError::Precondition(
                "sampled mode needs per_side >= 1".into(),
            ));
        }
    }
    let h = 1.0 / m as f64;
    let rows: Vec<Vec<u32>> = (0..m * m)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / m, k % m);
            match mode {
                EnclosureMode::OuterBound => {
                    f.image_rect(&Rect::cell(m, i, j)).cells_within(m, epsilon)
                }
                EnclosureMode::Sampled { per_side } => {
                    let mut out = Vec::new();
                    for a in 0..per_side {
                        for b in 0..per_side {
                            let s = (i as f64 + (a as f64 + 0.5) / per_side as f64) * h;
                            let t = (j as f64 + (b as f64 + 0.5) / per_side as f64) * h;
                            let (fs, ft) = f.lift_eval(s, t);
                            out.extend(cells_near_point(m, fs, ft, epsilon));
                        }
                    }
                    out.sort_unstable();
                    out.dedup();
                    out
                }
            }
        })
        .collect();
    let mut offsets = Vec::with_capacity(m * m + 1);
    offsets.push(0);
    let mut targets = Vec::with_capacity(rows.iter().map(Vec::len).sum());
    for row in rows {
        targets.extend_from_slice(&row);
        offsets.push(targets.len());
    }
    Ok(TransitionGraph {
        m,
        epsilon,
        mode,
        offsets,
        targets,
    })
}

impl TransitionGraph {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn node_count(&self) -> usize {
        self.m * self.m
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Successors of box `k`, sorted.
    pub fn successors(&self, k: u32) -> &[u32] {
        let k = k as usize;
        &self.targets[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn has_edge(&self, from: u32, to: u32) -> bool {
        self.successors(from).binary_search(&to).is_ok()
    }

    /// The subgraph keeping the edges `a → b` with `keep(a, b)`.
    pub fn retain_edges(&self, keep: impl Fn(u32, u32) -> bool) -> TransitionGraph {
        let mut offsets = Vec::with_capacity(self.offsets.len());
        offsets.push(0);
        let mut targets = Vec::new();
        for k in 0..self.node_count() as u32 {
            targets.extend(self.successors(k).iter().filter(|&&t| keep(k, t)));
            offsets.push(targets.len());
        }
        TransitionGraph {
            offsets,
            targets,
            ..*self
        }
    }

    /// Index of the box containing `(s, t)`.
    pub fn box_of(&self, s: f64, t: f64) -> u32 {
        let m = self.m;
        let i = ((s.rem_euclid(1.0) * m as f64) as usize).min(m - 1);
        let j = ((t.rem_euclid(1.0) * m as f64) as usize).min(m - 1);
        (i * m + j) as u32
    }

    pub fn stats(&self) -> GraphStats {
        let degrees = (0..self.node_count()).map(|k| self.offsets[k + 1] - self.offsets[k]);
        GraphStats {
            m: self.m,
            epsilon: self.epsilon,
            mode: self.mode,
            edges: self.edge_count(),
            min_out_degree: degrees.clone().min().unwrap_or(0),
            max_out_degree: degrees.max().unwrap_or(0),
            margin: match self.mode {
                EnclosureMode::OuterBound => ENCLOSURE_PAD,
                EnclosureMode::Sampled { .. } => 0.0,
            },
        }
    }

    /// One `from to` line per edge.
    pub fn write_edge_list(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(
            w,
            "# m={} epsilon={:e} edges={}",
            self.m,
            self.epsilon,
            self.edge_count()
        )?;
        for k in 0..self.node_count() {
            for &t in self.successors(k as u32) {
                writeln!(w, "{k} {t}")?;
            }
        }
        Ok(())
    }

    /// Strongly connected components (Tarjan), each sorted, ordered by their
    /// smallest member.
    pub fn strongly_connected_components(&self) -> Vec<Vec<u32>> {
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(self.node_count(), self.edge_count());
        for _ in 0..self.node_count() {
            g.add_node(());
        }
        for k in 0..self.node_count() {
            for &t in self.successors(k as u32) {
                g.add_edge((k as u32).into(), t.into(), ());
            }
        }
        let mut comps: Vec<Vec<u32>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<u32> = c.into_iter().map(|n| n.index() as u32).collect();
                v.sort_unstable();
                v
            })
            .collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }
}

/// Shortest path with at least one edge from any box of `from` to any box of
/// `to`, found by breadth-first search.
pub fn chain_path(
    graph: &TransitionGraph,
    from: &[u32],
    to: &[u32],
) -> Result<Option<Vec<u32>>, ChainError> {
    if from.is_empty() || to.is_empty() {
        return Err(ChainError::EmptySet);
    }
    let n = graph.node_count();
    let mut is_target = vec![false; n];
    for &t in to {
        is_target[t as usize] = true;
    }
    // parent[v] = (u, u is an initial source)
    let mut parent: Vec<Option<(u32, bool)>> = vec![None; n];
    let mut queue: VecDeque<(u32, bool)> = from.iter().map(|&s| (s, true)).collect();
    while let Some((u, initial)) = queue.pop_front() {
        for &v in graph.successors(u) {
            if parent[v as usize].is_some() {
                continue;
            }
            parent[v as usize] = Some((u, initial));
            if is_target[v as usize] {
                let mut path = vec![v];
                let mut cur = v;
                loop {
                    let (p, root) = parent[cur as usize].unwrap();
                    path.push(p);
                    if root {
                        break;
                    }
                    cur = p;
                }
                path.reverse();
                return Ok(Some(path));
            }
            queue.push_back((v, false));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct PairResult {
    pub from: u32,
    pub to: u32,
    /// Number of edges of the shortest chain, if any.
    pub path_edges: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub graph: GraphStats,
    pub trials: usize,
    pub connected: usize,
    pub fraction: f64,
    pub max_path_edges: usize,
    pub pairs: Vec<PairResult>,
    /// Boxes lying on a cycle of the graph.
    pub chain_recurrent_boxes: usize,
    pub recurrent_components: usize,
    pub single_recurrent_component: bool,
}

/// Random ordered box pairs tested for chain connection on one graph.
pub fn chain_transitivity_report(
    f: &SkewProduct,
    m: usize,
    epsilon: f64,
    trials: usize,
    seed: u64,
    mode: EnclosureMode,
) -> Result<ChainReport, ChainError> {
    let graph = build_transition_graph(f, m, epsilon, mode)?;
    Ok(chain_report_on(&graph, trials, seed))
}

pub fn chain_report_on(graph: &TransitionGraph, trials: usize, seed: u64) -> ChainReport {
    let n = graph.node_count() as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(u32, u32)> = (0..trials)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    let results: Vec<PairResult> = pairs
        .par_iter()
        .map(|&(a, b)| PairResult {
            from: a,
            to: b,
            path_edges: chain_path(graph, &[a], &[b]).unwrap().map(|p| p.len() - 1),
        })
        .collect();
    let connected = results.iter().filter(|r| r.path_edges.is_some()).count();
    let max_path_edges = results
        .iter()
        .filter_map(|r| r.path_edges)
        .max()
        .unwrap_or(0);

    let recurrent: Vec<Vec<u32>> = graph
        .strongly_connected_components()
        .into_iter()
        .filter(|c| c.len() > 1 || graph.has_edge(c[0], c[0]))
        .collect();
    ChainReport {
        graph: graph.stats(),
        trials,
        connected,
        fraction: if trials == 0 {
            1.0
        } else {
            connected as f64 / trials as f64
        },
        max_path_edges,
        pairs: results,
        chain_recurrent_boxes: recurrent.iter().map(Vec::len).sum(),
        recurrent_components: recurrent.len(),
        single_recurrent_component: recurrent.len() == 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::rigid_translation;

    fn graph_from(m: usize, edges: &[(u32, u32)]) -> TransitionGraph {
        let mut rows = vec![Vec::new(); m * m];
        for &(a, b) in edges {
            rows[a as usize].push(b);
        }
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            targets.extend(r);
            offsets.push(targets.len());
        }
        TransitionGraph {
            m,
            epsilon: 1.0,
            mode: EnclosureMode::OuterBound,
            offsets,
            targets,
        }
    }

    #[test]
    fn self_loop_path() {
        let g = graph_from(2, &[(1, 1)]);
        assert_eq!(chain_path(&g, &[1], &[1]).unwrap(), Some(vec![1, 1]));
        assert_eq!(chain_path(&g, &[0], &[0]).unwrap(), None);
    }

    #[test]
    fn source_is_target_needs_a_cycle() {
        let g = graph_from(2, &[(0, 1), (1, 2), (2, 0)]);
        assert_eq!(chain_path(&g, &[0], &[0]).unwrap(), Some(vec![0, 1, 2, 0]));
        assert_eq!(chain_path(&g, &[0, 1], &[2]).unwrap(), Some(vec![1, 2]));
        assert!(chain_path(&g, &[], &[2]).is_err());
    }

    #[test]
    fn epsilon_precondition() {
        let f = rigid_translation(0.1, 0.2);
        assert!(build_transition_graph(&f, 16, 0.05, EnclosureMode::OuterBound).is_err());
        assert!(build_transition_graph(&f, 16, 2.0 / 16.0, EnclosureMode::OuterBound).is_ok());
    }

    #[test]
    fn sampled_edges_subset_of_outer() {
        let f = rigid_translation(0.618_033_988_749_894_8, 0.414_213_562_373_095_1);
        let m = 16;
        let outer =
            build_transition_graph(&f, m, 2.0 / m as f64, EnclosureMode::OuterBound).unwrap();
        let sampled = build_transition_graph(
            &f,
            m,
            2.0 / m as f64,
            EnclosureMode::Sampled { per_side: 3 },
        )
        .unwrap();
        for k in 0..(m * m) as u32 {
            for &t in sampled.successors(k) {
                assert!(outer.has_edge(k, t));
            }
        }
    }
}
