//! Linear-threshold propagation, threshold sampling, and spread estimation.
//!
//! [`propagate`] computes the least fixed point of the LT activation rule for
//! one threshold realization; [`spread`] averages the influenced-node count
//! over a [`ThresholdSample`]. A node is influenced when the total weight on
//! incoming arcs from influenced nodes meets or exceeds its threshold.
//! Deactivated nodes are never influenced and never spread.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{ImpdError, Result};
use crate::graph::InfluenceGraph;

/// A sorted set of node ids. Used for both leader seed sets and follower
/// deactivation sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NodeSet(Vec<u32>);

/// Leader decision: the activated seed nodes.
pub type SeedSet = NodeSet;
/// Follower decision: the deactivated seed nodes.
pub type DeactivationSet = NodeSet;

impl NodeSet {
    pub fn new(mut members: Vec<u32>) -> Self {
        members.sort_unstable();
        members.dedup();
        NodeSet(members)
    }

    pub fn empty() -> Self {
        NodeSet(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, node: u32) -> bool {
        self.0.binary_search(&node).is_ok()
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset_of(&self, other: &NodeSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn with(&self, node: u32) -> NodeSet {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&node) {
            v.insert(pos, node);
        }
        NodeSet(v)
    }

    pub fn without(&self, node: u32) -> NodeSet {
        let mut v = self.0.clone();
        if let Ok(pos) = v.binary_search(&node) {
            v.remove(pos);
        }
        NodeSet(v)
    }

    /// Total of `costs` over the members.
    pub fn cost(&self, costs: &[f64]) -> f64 {
        self.iter().map(|i| costs[i as usize]).sum()
    }
}

impl FromIterator<u32> for NodeSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        NodeSet::new(iter.into_iter().collect())
    }
}

/// N realizations of per-node thresholds, each with weight 1/N.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSample {
    node_count: usize,
    /// Row-major: realization r occupies `r*n .. (r+1)*n`.
    values: Vec<f64>,
}

impl ThresholdSample {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn realization_count(&self) -> usize {
        if self.node_count == 0 {
            0
        } else {
            self.values.len() / self.node_count
        }
    }

    pub fn realization(&self, r: usize) -> &[f64] {
        &self.values[r * self.node_count..(r + 1) * self.node_count]
    }

    /// A sample made of `realizations` copies of one fixed threshold vector.
    /// Used for deterministic worked examples and degenerate tests.
    pub fn constant(theta: &[f64], realizations: usize) -> Self {
        let mut values = Vec::with_capacity(theta.len() * realizations);
        for _ in 0..realizations {
            values.extend_from_slice(theta);
        }
        ThresholdSample {
            node_count: theta.len(),
            values,
        }
    }

    /// Export as CSV, one realization per row, with the generating seed
    /// recorded in a header comment for replay.
    pub fn to_csv(&self, seed_note: &str) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        writeln!(out, "# threshold sample, seed {seed_note}").unwrap();
        for r in 0..self.realization_count() {
            let row: Vec<String> = self.realization(r).iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }
}

/// Latin Hypercube sample of thresholds: for every node column the N values
/// are a shuffled set of one uniform draw per stratum `[k/N, (k+1)/N)`.
pub fn sample_thresholds_lhs(
    node_count: usize,
    realizations: usize,
    rng: &mut (impl Rng + ?Sized),
) -> ThresholdSample {
    let n_f = realizations as f64;
    let mut values = vec![0.0f64; node_count * realizations];
    let mut column: Vec<f64> = Vec::with_capacity(realizations);
    for node in 0..node_count {
        column.clear();
        for k in 0..realizations {
            column.push((k as f64 + rng.gen::<f64>()) / n_f);
        }
        column.shuffle(rng);
        for (r, &v) in column.iter().enumerate() {
            values[r * node_count + node] = v;
        }
    }
    ThresholdSample {
        node_count,
        values,
    }
}

/// Threshold generator used by the SAA stages. The default is Latin
/// Hypercube; a fixed generator makes every stage deterministic, which is
/// what the worked-example and degenerate tests rely on.
pub trait ThresholdSampler {
    fn sample(
        &self,
        node_count: usize,
        realizations: usize,
        rng: &mut dyn rand::RngCore,
    ) -> ThresholdSample;
}

/// Latin Hypercube stratified uniform thresholds.
#[derive(Debug, Clone, Copy, Default)]
pub struct LhsSampler;

impl ThresholdSampler for LhsSampler {
    fn sample(
        &self,
        node_count: usize,
        realizations: usize,
        rng: &mut dyn rand::RngCore,
    ) -> ThresholdSample {
        sample_thresholds_lhs(node_count, realizations, rng)
    }
}

/// Degenerate sampler returning copies of one fixed threshold vector.
#[derive(Debug, Clone)]
pub struct FixedSampler(pub Vec<f64>);

impl ThresholdSampler for FixedSampler {
    fn sample(
        &self,
        node_count: usize,
        realizations: usize,
        _rng: &mut dyn rand::RngCore,
    ) -> ThresholdSample {
        assert_eq!(node_count, self.0.len());
        ThresholdSample::constant(&self.0, realizations)
    }
}

const STATE_IDLE: u8 = 0;
const STATE_INFLUENCED: u8 = 1;
const STATE_DEACTIVATED: u8 = 2;

/// Reusable scratch space for propagation; avoids per-realization
/// allocations in the spread loop.
struct PropagationState {
    state: Vec<u8>,
    incoming: Vec<f64>,
    frontier: Vec<u32>,
    touched: Vec<u32>,
}

impl PropagationState {
    fn new(n: usize) -> Self {
        PropagationState {
            state: vec![STATE_IDLE; n],
            incoming: vec![0.0; n],
            frontier: Vec::with_capacity(n),
            touched: Vec::with_capacity(n),
        }
    }

    /// Run one realization; returns the influenced count and leaves the
    /// influenced flags in `state` until `reset` is called.
    fn run(
        &mut self,
        g: &InfluenceGraph,
        active: &NodeSet,
        deactivated: &NodeSet,
        theta: &[f64],
    ) -> usize {
        for i in deactivated.iter() {
            self.state[i as usize] = STATE_DEACTIVATED;
            self.touched.push(i);
        }
        let mut count = 0usize;
        for i in active.iter() {
            if self.state[i as usize] == STATE_IDLE {
                self.state[i as usize] = STATE_INFLUENCED;
                self.touched.push(i);
                self.frontier.push(i);
                count += 1;
            }
        }
        while let Some(u) = self.frontier.pop() {
            for &(v, w) in g.out_neighbors(u as usize) {
                let vi = v as usize;
                if self.state[vi] != STATE_IDLE {
                    continue;
                }
                if self.incoming[vi] == 0.0 {
                    self.touched.push(v);
                }
                self.incoming[vi] += w;
                if self.incoming[vi] >= theta[vi] {
                    self.state[vi] = STATE_INFLUENCED;
                    self.frontier.push(v);
                    count += 1;
                }
            }
        }
        count
    }

    fn reset(&mut self) {
        for &i in &self.touched {
            self.state[i as usize] = STATE_IDLE;
            self.incoming[i as usize] = 0.0;
        }
        self.touched.clear();
        self.frontier.clear();
    }
}

fn check_propagate_args(
    g: &InfluenceGraph,
    active: &NodeSet,
    deactivated: &NodeSet,
    theta_len: usize,
) -> Result<()> {
    if !deactivated.is_subset_of(active) {
        return Err(ImpdError::InvalidArgument(
            "deactivation set is not a subset of the seed set".into(),
        ));
    }
    if theta_len != g.node_count() {
        return Err(ImpdError::InvalidArgument(format!(
            "threshold vector has {} entries, graph has {} nodes",
            theta_len,
            g.node_count()
        )));
    }
    if let Some(max) = active.members().last() {
        if *max as usize >= g.node_count() {
            return Err(ImpdError::NodeOutOfRange {
                node: *max as usize,
                n: g.node_count(),
            });
        }
    }
    Ok(())
}

/// Influenced node set at the diffusion fixed point for one realization.
pub fn propagate(
    g: &InfluenceGraph,
    active: &SeedSet,
    deactivated: &DeactivationSet,
    theta: &[f64],
) -> Result<NodeSet> {
    check_propagate_args(g, active, deactivated, theta.len())?;
    let mut ps = PropagationState::new(g.node_count());
    ps.run(g, active, deactivated, theta);
    let influenced = ps
        .touched
        .iter()
        .copied()
        .filter(|&i| ps.state[i as usize] == STATE_INFLUENCED)
        .collect();
    Ok(influenced)
}

/// Mean influenced-node count over every realization of `sample`.
pub fn spread(
    g: &InfluenceGraph,
    active: &SeedSet,
    deactivated: &DeactivationSet,
    sample: &ThresholdSample,
) -> Result<f64> {
    let counts = spread_counts(g, active, deactivated, sample)?;
    let total: usize = counts.iter().sum();
    Ok(total as f64 / counts.len().max(1) as f64)
}

/// Per-realization influenced counts; the mean of these is the spread.
/// Stage 3 of the SAA estimator keeps them for the gap-variance term.
pub fn spread_counts(
    g: &InfluenceGraph,
    active: &SeedSet,
    deactivated: &DeactivationSet,
    sample: &ThresholdSample,
) -> Result<Vec<usize>> {
    check_propagate_args(g, active, deactivated, sample.node_count())?;
    let mut ps = PropagationState::new(g.node_count());
    let mut counts = Vec::with_capacity(sample.realization_count());
    for r in 0..sample.realization_count() {
        counts.push(ps.run(g, active, deactivated, sample.realization(r)));
        ps.reset();
    }
    Ok(counts)
}
