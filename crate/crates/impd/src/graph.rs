//! Directed influence-graph representation, generators, ingestion, and
//! shortest-path preprocessing.
//!
//! Arc weights live in `(0, 1]` and, after [`InfluenceGraph::normalized`],
//! every node's incoming weights sum to at most one, which is the feasibility
//! condition of the linear-threshold diffusion model.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::error::{ImpdError, Result};

/// Tolerance for the normalized in-weight bound.
pub const IN_WEIGHT_TOL: f64 = 1e-12;

/// Finite stand-in for an unreachable shortest-path entry. Kept finite so
/// candidate scores that sum path lengths stay well-defined.
pub const UNREACHABLE: f64 = 1e18;

/// A directed weighted graph with adjacency indices in both directions.
///
/// Immutable after construction; normalization and subgraph extraction
/// return new graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    n: usize,
    arcs: Vec<(u32, u32, f64)>,
    out_adj: Vec<Vec<(u32, f64)>>,
    in_adj: Vec<Vec<(u32, f64)>>,
}

impl InfluenceGraph {
    /// Build a graph from an arc list.
    ///
    /// Parallel arcs are merged keeping the first occurrence. Self-loops,
    /// out-of-range endpoints and weights outside `(0, 1]` are rejected.
    pub fn build(n: usize, arcs: &[(usize, usize, f64)]) -> Result<Self> {
        let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
        let mut kept: Vec<(u32, u32, f64)> = Vec::with_capacity(arcs.len());
        for &(tail, head, weight) in arcs {
            if tail >= n {
                return Err(ImpdError::NodeOutOfRange { node: tail, n });
            }
            if head >= n {
                return Err(ImpdError::NodeOutOfRange { node: head, n });
            }
            if tail == head {
                return Err(ImpdError::SelfLoop(tail));
            }
            if !(weight > 0.0 && weight <= 1.0) || !weight.is_finite() {
                return Err(ImpdError::BadWeight { tail, head, weight });
            }
            let key = (tail as u32, head as u32);
            if seen.insert(key, ()).is_none() {
                kept.push((key.0, key.1, weight));
            }
        }
        kept.sort_by_key(|&(t, h, _)| (t, h));
        Ok(Self::from_clean_arcs(n, kept))
    }

    fn from_clean_arcs(n: usize, arcs: Vec<(u32, u32, f64)>) -> Self {
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(t, h, w) in &arcs {
            out_adj[t as usize].push((h, w));
            in_adj[h as usize].push((t, w));
        }
        InfluenceGraph {
            n,
            arcs,
            out_adj,
            in_adj,
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// Arcs sorted by `(tail, head)`.
    pub fn arcs(&self) -> &[(u32, u32, f64)] {
        &self.arcs
    }

    pub fn out_neighbors(&self, node: usize) -> &[(u32, f64)] {
        &self.out_adj[node]
    }

    pub fn in_neighbors(&self, node: usize) -> &[(u32, f64)] {
        &self.in_adj[node]
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_adj[node].len()
    }

    pub fn in_weight_sum(&self, node: usize) -> f64 {
        self.in_adj[node].iter().map(|&(_, w)| w).sum()
    }

    /// Arc density `m / (n (n - 1))`.
    pub fn density(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(ImpdError::InvalidArgument(
                "density requires at least 2 nodes".into(),
            ));
        }
        Ok(self.arcs.len() as f64 / (self.n as f64 * (self.n as f64 - 1.0)))
    }

    /// Rescale incoming weights so every node's in-weight sum is at most one.
    ///
    /// Nodes whose sum already satisfies the bound are left untouched; the
    /// rest have all incoming weights divided by the sum.
    pub fn normalized(&self) -> InfluenceGraph {
        let mut scale = vec![1.0f64; self.n];
        for i in 0..self.n {
            let s = self.in_weight_sum(i);
            if s > 1.0 {
                scale[i] = 1.0 / s;
            }
        }
        let arcs = self
            .arcs
            .iter()
            .map(|&(t, h, w)| (t, h, w * scale[h as usize]))
            .collect();
        Self::from_clean_arcs(self.n, arcs)
    }

    /// Induced subgraph on the `n_sub` nodes of largest out-degree
    /// (ties broken by smallest original id). Weights are re-normalized.
    pub fn top_outdegree_subgraph(&self, n_sub: usize) -> Result<InfluenceGraph> {
        if n_sub > self.n {
            return Err(ImpdError::InvalidArgument(format!(
                "subgraph size {n_sub} exceeds node count {}",
                self.n
            )));
        }
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&i| (Reverse(self.out_degree(i)), i));
        let mut keep: Vec<usize> = order[..n_sub].to_vec();
        keep.sort_unstable();
        let mut remap = vec![usize::MAX; self.n];
        for (new_id, &old_id) in keep.iter().enumerate() {
            remap[old_id] = new_id;
        }
        let arcs: Vec<(u32, u32, f64)> = self
            .arcs
            .iter()
            .filter(|&&(t, h, _)| {
                remap[t as usize] != usize::MAX && remap[h as usize] != usize::MAX
            })
            .map(|&(t, h, w)| (remap[t as usize] as u32, remap[h as usize] as u32, w))
            .collect();
        Ok(Self::from_clean_arcs(n_sub, arcs).normalized())
    }

    /// Write the graph in edge-list form: `tail head weight`, one arc per
    /// line, deterministic `(tail, head)` ordering, `#` header.
    pub fn export_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = String::new();
        writeln!(text, "# nodes {}", self.n).unwrap();
        writeln!(text, "# arcs {}", self.arcs.len()).unwrap();
        for &(t, h, w) in &self.arcs {
            writeln!(text, "{t} {h} {w:?}").unwrap();
        }
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// How to fill in weights for edge-list arcs that do not carry one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissingWeight {
    /// `1 / out-degree(tail)`, assigned in a second pass. The default for
    /// unweighted co-authorship style data.
    OutDegree,
    /// Uniform draw on `(0, 1]`, as used for synthetic graphs.
    Uniform,
}

/// Load a whitespace-separated `tail head [weight]` edge list.
///
/// `#` starts a comment. Parallel arcs are removed keeping the first
/// occurrence, node ids are compacted to `0..n-1` in ascending id order, and
/// in-weights are normalized. Missing weights default to one over the tail's
/// out-degree.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<InfluenceGraph> {
    load_edge_list_with(path, MissingWeight::OutDegree, &mut rand::thread_rng())
}

pub fn load_edge_list_with(
    path: impl AsRef<Path>,
    missing: MissingWeight,
    rng: &mut impl Rng,
) -> Result<InfluenceGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();

    let mut raw: Vec<(u64, u64, Option<f64>)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse_id = |s: Option<&str>, what: &str| -> Result<u64> {
            s.ok_or_else(|| ImpdError::Parse {
                path: display.clone(),
                line: idx + 1,
                msg: format!("missing {what}"),
            })?
            .parse()
            .map_err(|_| ImpdError::Parse {
                path: display.clone(),
                line: idx + 1,
                msg: format!("invalid {what}"),
            })
        };
        let tail = parse_id(fields.next(), "tail node id")?;
        let head = parse_id(fields.next(), "head node id")?;
        let weight = match fields.next() {
            Some(s) => Some(s.parse::<f64>().map_err(|_| ImpdError::Parse {
                path: display.clone(),
                line: idx + 1,
                msg: "invalid weight".into(),
            })?),
            None => None,
        };
        if fields.next().is_some() {
            return Err(ImpdError::Parse {
                path: display.clone(),
                line: idx + 1,
                msg: "trailing fields".into(),
            });
        }
        if tail == head {
            continue; // self-loops in raw data are dropped
        }
        raw.push((tail, head, weight));
    }

    if raw.is_empty() {
        log::warn!("{display}: empty edge list, producing a 0-node graph");
        return InfluenceGraph::build(0, &[]);
    }

    // Compact ids to 0..n-1 by ascending original id.
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(t, h, _)| [t, h]).collect();
    ids.sort_unstable();
    ids.dedup();
    let remap: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();

    // Dedup keeping first occurrence.
    let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
    let mut arcs: Vec<(usize, usize, Option<f64>)> = Vec::new();
    for &(t, h, w) in &raw {
        let key = (remap[&t], remap[&h]);
        if seen.insert(key, ()).is_none() {
            arcs.push((key.0, key.1, w));
        }
    }
    let dropped = raw.len() - arcs.len();
    if dropped > 0 {
        log::info!("{display}: removed {dropped} parallel arcs, {} remain", arcs.len());
    }

    // Second pass: fill missing weights.
    let mut out_degree = vec![0usize; n];
    for &(t, _, _) in &arcs {
        out_degree[t] += 1;
    }
    let filled: Vec<(usize, usize, f64)> = arcs
        .into_iter()
        .map(|(t, h, w)| {
            let w = w.unwrap_or_else(|| match missing {
                MissingWeight::OutDegree => 1.0 / out_degree[t] as f64,
                MissingWeight::Uniform => 1.0 - rng.gen::<f64>(),
            });
            (t, h, w.min(1.0))
        })
        .collect();

    Ok(InfluenceGraph::build(n, &filled)?.normalized())
}

/// Ring degree that realizes a target arc density for a directed ring
/// lattice of `n` nodes, rounded to the nearest even integer (at least 2).
pub fn ring_degree_for_density(n: usize, target_density: f64) -> Result<usize> {
    let k = (target_density * (n as f64 - 1.0)).round() as usize;
    let k = if k % 2 == 1 { k + 1 } else { k };
    let k = k.max(2);
    if k >= n {
        return Err(ImpdError::Infeasible(format!(
            "density {target_density} infeasible for n = {n} (ring degree {k})"
        )));
    }
    Ok(k)
}

/// Directed Watts-Strogatz small-world graph.
///
/// Starts from a directed ring lattice where each node points at its
/// `ring_degree / 2` nearest neighbors on each side, then rewires every arc
/// head with probability `rewire_prob` (avoiding self-loops and duplicates).
/// Weights are drawn uniform on `(0, 1]` and in-weights normalized. The
/// realized arc count is exactly `n * ring_degree`.
pub fn generate_watts_strogatz(
    n: usize,
    ring_degree: usize,
    rewire_prob: f64,
    rng: &mut impl Rng,
) -> Result<InfluenceGraph> {
    if ring_degree >= n || ring_degree == 0 || ring_degree % 2 != 0 {
        return Err(ImpdError::InvalidArgument(format!(
            "ring degree {ring_degree} must be even, positive, and below n = {n}"
        )));
    }
    let half = ring_degree / 2;
    let mut present: HashMap<(u32, u32), ()> = HashMap::new();
    let mut arcs: Vec<(u32, u32)> = Vec::with_capacity(n * ring_degree);
    for i in 0..n {
        for d in 1..=half {
            for head in [(i + d) % n, (i + n - d) % n] {
                if present.insert((i as u32, head as u32), ()).is_none() {
                    arcs.push((i as u32, head as u32));
                }
            }
        }
    }
    for idx in 0..arcs.len() {
        if rng.gen::<f64>() < rewire_prob {
            let (tail, old_head) = arcs[idx];
            // Retry a bounded number of times; a dense tail may have no
            // available head left.
            for _ in 0..4 * n {
                let new_head = rng.gen_range(0..n) as u32;
                if new_head == tail || present.contains_key(&(tail, new_head)) {
                    continue;
                }
                present.remove(&(tail, old_head));
                present.insert((tail, new_head), ());
                arcs[idx] = (tail, new_head);
                break;
            }
        }
    }
    let weighted: Vec<(usize, usize, f64)> = arcs
        .iter()
        .map(|&(t, h)| (t as usize, h as usize, 1.0 - rng.gen::<f64>()))
        .collect();
    Ok(InfluenceGraph::build(n, &weighted)?.normalized())
}

/// Watts-Strogatz graph at a target density, with the ring degree derived
/// automatically. Errors if the realized density misses the target by more
/// than 5 percent.
pub fn watts_strogatz_at_density(
    n: usize,
    target_density: f64,
    rewire_prob: f64,
    rng: &mut impl Rng,
) -> Result<InfluenceGraph> {
    let k = ring_degree_for_density(n, target_density)?;
    let g = generate_watts_strogatz(n, k, rewire_prob, rng)?;
    let realized = g.density()?;
    if (realized - target_density).abs() > 0.05 * target_density.max(realized) {
        return Err(ImpdError::Infeasible(format!(
            "target density {target_density} not realizable for n = {n} (got {realized})"
        )));
    }
    Ok(g)
}

/// All-pairs shortest path lengths under arc length `-ln(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLengthMatrix {
    n: usize,
    lambda: Vec<f64>,
}

impl PathLengthMatrix {
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Shortest `-log` path length from `i` to `j`; [`UNREACHABLE`] if no
    /// directed path exists.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lambda[i * self.n + j]
    }
}

/// All-pairs shortest paths by running Dijkstra from every source.
///
/// Arc `(i, j)` has length `-ln(w_ij) >= 0` since weights are in `(0, 1]`,
/// so `exp(-lambda_ij)` is the largest product of weights along any `i -> j`
/// path.
pub fn shortest_path_matrix(g: &InfluenceGraph) -> PathLengthMatrix {
    let n = g.node_count();
    let mut lambda = vec![UNREACHABLE; n * n];

    #[derive(PartialEq)]
    struct Entry(f64, u32);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
        }
    }

    let mut dist = vec![UNREACHABLE; n];
    for src in 0..n {
        dist.iter_mut().for_each(|d| *d = UNREACHABLE);
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse(Entry(0.0, src as u32)));
        while let Some(Reverse(Entry(d, u))) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            for &(v, w) in g.out_neighbors(u as usize) {
                let len = -w.ln();
                let nd = d + len.max(0.0);
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(Reverse(Entry(nd, v)));
                }
            }
        }
        lambda[src * n..(src + 1) * n].copy_from_slice(&dist);
    }
    PathLengthMatrix { n, lambda }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use std::io::Write as _;

    /// The six-node worked example: nodes A..F mapped to 0..5.
    pub(crate) fn six_node_graph() -> InfluenceGraph {
        InfluenceGraph::build(
            6,
            &[
                (0, 1, 0.7),
                (1, 2, 0.1),
                (1, 3, 0.1),
                (1, 4, 0.2),
                (2, 5, 0.6),
                (3, 0, 0.1),
                (4, 2, 0.9),
                (4, 3, 0.2),
                (4, 5, 0.2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_graph() {
        let g = InfluenceGraph::build(2, &[]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.arc_count(), 0);
    }

    #[test]
    fn six_node_graph_shape() {
        let g = six_node_graph();
        assert_eq!(g.arc_count(), 9);
        for i in 0..6 {
            assert!(g.in_weight_sum(i) <= 1.0 + IN_WEIGHT_TOL);
        }
    }

    #[test]
    fn duplicate_arcs_merged_keeping_first() {
        let g = InfluenceGraph::build(2, &[(0, 1, 0.3), (0, 1, 0.9)]).unwrap();
        assert_eq!(g.arc_count(), 1);
        assert_eq!(g.arcs()[0], (0, 1, 0.3));
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(
            InfluenceGraph::build(2, &[(0, 2, 0.5)]),
            Err(ImpdError::NodeOutOfRange { node: 2, .. })
        ));
        assert!(matches!(
            InfluenceGraph::build(2, &[(1, 1, 0.5)]),
            Err(ImpdError::SelfLoop(1))
        ));
        assert!(matches!(
            InfluenceGraph::build(2, &[(0, 1, 0.0)]),
            Err(ImpdError::BadWeight { .. })
        ));
        assert!(matches!(
            InfluenceGraph::build(2, &[(0, 1, 1.5)]),
            Err(ImpdError::BadWeight { .. })
        ));
    }

    #[test]
    fn normalization_scales_overloaded_nodes() {
        let g = InfluenceGraph::build(3, &[(0, 2, 0.8), (1, 2, 0.8)])
            .unwrap()
            .normalized();
        let ws: Vec<f64> = g.in_neighbors(2).iter().map(|&(_, w)| w).collect();
        assert!((ws[0] - 0.5).abs() < 1e-15);
        assert!((ws[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn normalization_leaves_feasible_nodes_untouched() {
        let g = InfluenceGraph::build(3, &[(0, 2, 0.2), (1, 2, 0.3)])
            .unwrap()
            .normalized();
        let ws: Vec<f64> = g.in_neighbors(2).iter().map(|&(_, w)| w).collect();
        assert_eq!(ws, vec![0.2, 0.3]);
    }

    #[test]
    fn normalization_bound_holds_on_random_graphs() {
        for trial in 0..100u64 {
            let mut rng = substream(trial, "norm-test", 0);
            let g = generate_watts_strogatz(24, 4, 0.2, &mut rng).unwrap();
            for i in 0..g.node_count() {
                assert!(g.in_weight_sum(i) <= 1.0 + IN_WEIGHT_TOL);
            }
        }
    }

    #[test]
    fn density_values() {
        let mut rng = substream(1, "density", 0);
        let g = watts_strogatz_at_density(20, 0.105, 0.1, &mut rng).unwrap();
        assert!((g.arc_count() as i64 - 40).abs() <= 2);
        assert!((g.density().unwrap() - 0.10526).abs() < 0.01);

        let complete = InfluenceGraph::build(2, &[(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        assert_eq!(complete.density().unwrap(), 1.0);
        assert_eq!(
            g.density().unwrap(),
            g.arc_count() as f64 / (20.0 * 19.0)
        );
        assert!(InfluenceGraph::build(1, &[]).unwrap().density().is_err());
    }

    #[test]
    fn ws_hundred_nodes_near_table_density() {
        let mut rng = substream(2, "density", 0);
        let g = watts_strogatz_at_density(100, 0.0404, 0.1, &mut rng).unwrap();
        assert!((g.arc_count() as i64 - 400).abs() <= 20);
    }

    #[test]
    fn ws_no_rewire_is_pure_ring() {
        let mut rng = substream(3, "ring", 0);
        let g = generate_watts_strogatz(8, 2, 0.0, &mut rng).unwrap();
        assert_eq!(g.arc_count(), 16);
        for i in 0..8u32 {
            let mut heads: Vec<u32> =
                g.out_neighbors(i as usize).iter().map(|&(h, _)| h).collect();
            heads.sort_unstable();
            let mut expect = vec![(i + 1) % 8, (i + 7) % 8];
            expect.sort_unstable();
            assert_eq!(heads, expect);
        }
    }

    #[test]
    fn ws_is_seed_reproducible() {
        let g1 = generate_watts_strogatz(30, 4, 0.1, &mut substream(9, "ws", 0)).unwrap();
        let g2 = generate_watts_strogatz(30, 4, 0.1, &mut substream(9, "ws", 0)).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn edge_list_roundtrip_and_dedup() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# a comment").unwrap();
        writeln!(f, "10 20 0.4").unwrap();
        writeln!(f, "10 20 0.9").unwrap();
        writeln!(f, "20 30").unwrap();
        drop(f);
        let g = load_edge_list(&path).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.arc_count(), 2);
        // Missing weight = 1 / out-degree of compacted node "20".
        let w = g.out_neighbors(1)[0].1;
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn edge_list_malformed_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "0 1 0.5\nnope nope\n").unwrap();
        match load_edge_list(&path) {
            Err(ImpdError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn edge_list_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.txt");
        std::fs::write(&path, "").unwrap();
        let g = load_edge_list(&path).unwrap();
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn export_then_load_preserves_structure() {
        let mut rng = substream(4, "export", 0);
        let g = generate_watts_strogatz(12, 2, 0.3, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.txt");
        g.export_edge_list(&path).unwrap();
        let back = load_edge_list(&path).unwrap();
        assert_eq!(g.arcs(), back.arcs());
    }

    #[test]
    fn subgraph_full_size_is_identity() {
        let mut rng = substream(5, "sub", 0);
        let g = generate_watts_strogatz(10, 2, 0.2, &mut rng).unwrap();
        let sub = g.top_outdegree_subgraph(10).unwrap();
        // Renormalization may perturb weights by an ulp, so compare the
        // structure exactly and the weights within tolerance.
        assert_eq!(g.arc_count(), sub.arc_count());
        for (a, b) in g.arcs().iter().zip(sub.arcs()) {
            assert_eq!((a.0, a.1), (b.0, b.1));
            assert!((a.2 - b.2).abs() < 1e-12);
        }
    }

    #[test]
    fn subgraph_of_star_keeps_hub() {
        let g = InfluenceGraph::build(
            4,
            &[(0, 1, 0.5), (0, 2, 0.5), (0, 3, 0.5)],
        )
        .unwrap();
        let sub = g.top_outdegree_subgraph(1).unwrap();
        assert_eq!(sub.node_count(), 1);
        assert_eq!(sub.arc_count(), 0);
        assert!(g.top_outdegree_subgraph(5).is_err());
    }

    /// Floyd-Warshall oracle for the Dijkstra sweep.
    fn floyd_warshall(g: &InfluenceGraph) -> Vec<f64> {
        let n = g.node_count();
        let mut d = vec![UNREACHABLE; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        for &(t, h, w) in g.arcs() {
            let len = (-w.ln()).max(0.0);
            let cell = &mut d[t as usize * n + h as usize];
            *cell = cell.min(len);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i * n + k] + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn six_node_shortest_paths() {
        let g = six_node_graph();
        let m = shortest_path_matrix(&g);
        // [DERIVED] A -> B -> E -> C has weight product 0.7 * 0.2 * 0.9 =
        // 0.126, beating the direct A -> B -> C product 0.07.
        let expect = -(0.7f64.ln()) - 0.2f64.ln() - 0.9f64.ln();
        assert!((m.get(0, 2) - expect).abs() < 1e-12);
    }

    #[test]
    fn single_unit_weight_arc_has_zero_length() {
        let g = InfluenceGraph::build(2, &[(0, 1, 1.0)]).unwrap();
        let m = shortest_path_matrix(&g);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(1, 0), UNREACHABLE);
    }

    #[test]
    fn dijkstra_matches_floyd_warshall() {
        for trial in 0..20u64 {
            let mut rng = substream(trial, "apsp", 0);
            let n = 10 + (trial as usize % 5) * 10; // 10..50
            let g = generate_watts_strogatz(n, 4, 0.3, &mut rng).unwrap();
            let m = shortest_path_matrix(&g);
            let oracle = floyd_warshall(&g);
            for i in 0..n {
                for j in 0..n {
                    let a = m.get(i, j);
                    let b = oracle[i * n + j];
                    if a >= UNREACHABLE || b >= UNREACHABLE {
                        assert!(a >= UNREACHABLE && b >= UNREACHABLE);
                    } else {
                        assert!((a - b).abs() < 1e-9, "({i},{j}): {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn path_length_matches_max_product() {
        // exp(-lambda_ij) equals the best product of weights over any path;
        // checked by exhaustive simple-path search on a small graph.
        let mut rng = substream(11, "prod", 0);
        let g = generate_watts_strogatz(7, 2, 0.4, &mut rng).unwrap();
        let n = g.node_count();
        let m = shortest_path_matrix(&g);

        fn best_product(
            g: &InfluenceGraph,
            cur: usize,
            goal: usize,
            seen: &mut Vec<bool>,
            acc: f64,
        ) -> f64 {
            if cur == goal {
                return acc;
            }
            let mut best = 0.0f64;
            for &(h, w) in g.out_neighbors(cur) {
                if !seen[h as usize] {
                    seen[h as usize] = true;
                    best = best.max(best_product(g, h as usize, goal, seen, acc * w));
                    seen[h as usize] = false;
                }
            }
            best
        }

        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut seen = vec![false; n];
                seen[i] = true;
                let prod = best_product(&g, i, j, &mut seen, 1.0);
                let via_lambda = if m.get(i, j) >= UNREACHABLE {
                    0.0
                } else {
                    (-m.get(i, j)).exp()
                };
                assert!((prod - via_lambda).abs() < 1e-9, "({i},{j})");
            }
        }
    }
}
