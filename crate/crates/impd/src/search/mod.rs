//! Upper-level solvers: complete enumeration and the two matheuristics.
//!
//! Both matheuristics search the leader's seed-set space and price every
//! candidate with the three-stage estimator, so candidate evaluation
//! dominates the runtime. A shared memory guarantees no seed set is ever
//! evaluated twice within one run.

mod sam;
mod tsm;

pub use sam::{sam_solve, SamParams};
pub use tsm::{tsm_solve, TsmParams};

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::diffusion::{sample_thresholds_lhs, spread, LhsSampler, NodeSet, SeedSet, ThresholdSampler};
use crate::error::{ImpdError, Result};
use crate::instance::{CostMode, ImpdInstance};
use crate::rng::substream;
use crate::saa::{saa_evaluate_with, SaaParams};
use crate::subsets::for_each_maximal_subset;

/// Cap on the number of maximal seed sets complete enumeration will visit.
pub const MAX_ENUMERATED_SEEDS: usize = 2_000_000;

/// Neighborhood move operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Add,
    Drop,
    Swap,
}

impl MoveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MoveKind::Add => "add",
            MoveKind::Drop => "drop",
            MoveKind::Swap => "swap",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            MoveKind::Add => 0,
            MoveKind::Drop => 1,
            MoveKind::Swap => 2,
        }
    }
}

/// Move types in use for an instance: cardinality instances use 1-Swap only.
pub fn available_moves(inst: &ImpdInstance) -> &'static [MoveKind] {
    match inst.cost_mode {
        CostMode::Cardinality => &[MoveKind::Swap],
        CostMode::CostBased => &[MoveKind::Add, MoveKind::Drop, MoveKind::Swap],
    }
}

/// One checkpointed trace row of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub wall_secs: f64,
    pub iteration: u64,
    pub incumbent_value: f64,
    pub current_value: f64,
    /// Temperature (SAM) or candidate fraction (TSM).
    pub control: f64,
    pub move_kind: Option<MoveKind>,
}

/// Result of a matheuristic run.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: SeedSet,
    pub best_value: f64,
    pub trace: Vec<TracePoint>,
    pub move_counts: [u64; 3],
    pub iterations: u64,
    /// True when the run stopped because no move type had an eligible
    /// neighbor, rather than on the time limit.
    pub exhausted: bool,
}

/// Memory of every seed set generated during a run, plus the per-node
/// containment frequencies used by the diversification penalty.
#[derive(Debug, Default)]
pub struct Memory {
    visited: HashMap<NodeSet, f64>,
    containment: Vec<u64>,
}

impl Memory {
    pub fn new(node_count: usize) -> Self {
        Memory {
            visited: HashMap::new(),
            containment: vec![0; node_count],
        }
    }

    pub fn contains(&self, s: &NodeSet) -> bool {
        self.visited.contains_key(s)
    }

    pub fn len(&self) -> usize {
        self.visited.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visited.is_empty()
    }

    pub fn value_of(&self, s: &NodeSet) -> Option<f64> {
        self.visited.get(s).copied()
    }

    pub fn record(&mut self, s: &NodeSet, value: f64) {
        if self.visited.contains_key(s) {
            return;
        }
        self.visited.insert(s.clone(), value);
        for i in s.iter() {
            self.containment[i as usize] += 1;
        }
    }

    /// Proportion of visited sets containing node `i`.
    pub fn frequency(&self, i: u32) -> f64 {
        if self.visited.is_empty() {
            0.0
        } else {
            self.containment[i as usize] as f64 / self.visited.len() as f64
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.containment.len() as u32)
            .map(|i| self.frequency(i))
            .collect()
    }
}

/// Cached, deterministic pricing of seed sets by the three-stage estimator.
///
/// Every set gets its own SAA sub-stream derived from the run seed and the
/// set members, so the value of a set is a pure function of (instance,
/// profile, run seed, set) and is computed at most once.
pub struct SpreadEvaluator<'a> {
    inst: &'a ImpdInstance,
    profile: SaaParams,
    run_seed: u64,
    sampler: Box<dyn ThresholdSampler>,
    cache: HashMap<NodeSet, f64>,
    /// Number of actual estimator invocations (cache misses).
    pub computed: usize,
}

impl<'a> SpreadEvaluator<'a> {
    pub fn new(inst: &'a ImpdInstance, profile: SaaParams, run_seed: u64) -> Self {
        Self::with_sampler(inst, profile, run_seed, Box::new(LhsSampler))
    }

    pub fn with_sampler(
        inst: &'a ImpdInstance,
        profile: SaaParams,
        run_seed: u64,
        sampler: Box<dyn ThresholdSampler>,
    ) -> Self {
        SpreadEvaluator {
            inst,
            profile,
            run_seed,
            sampler,
            cache: HashMap::new(),
            computed: 0,
        }
    }

    pub fn instance(&self) -> &'a ImpdInstance {
        self.inst
    }

    fn set_seed(&self, s: &NodeSet) -> u64 {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.run_seed.to_le_bytes());
        hasher.update(b"saa-eval");
        for i in s.iter() {
            hasher.update(i.to_le_bytes());
        }
        let digest = hasher.finalize();
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// Estimated follower-optimal spread of seed set `s`.
    pub fn evaluate(&mut self, s: &NodeSet) -> Result<f64> {
        if let Some(&v) = self.cache.get(s) {
            return Ok(v);
        }
        let params = SaaParams {
            rng_seed: self.set_seed(s),
            ..self.profile.clone()
        };
        let report = saa_evaluate_with(self.inst, s, &params, self.sampler.as_ref())?;
        self.computed += 1;
        self.cache.insert(s.clone(), report.upper_bound);
        Ok(report.upper_bound)
    }
}

/// Pseudo-objective: estimated spread plus the average number of nodes the
/// remaining budget could still activate.
pub fn pseudo_objective(inst: &ImpdInstance, s: &SeedSet, z_hat: f64) -> f64 {
    z_hat + (inst.leader_budget - inst.activation_cost(s)) / inst.mean_activation_cost()
}

/// A solution is eligible when it fits the leader budget, has not been
/// generated before, and cannot be fully deactivated by the follower.
pub fn is_eligible(inst: &ImpdInstance, s: &SeedSet, memory: &Memory) -> bool {
    inst.is_budget_feasible(s)
        && !memory.contains(s)
        && inst.deactivation_cost(s) > inst.follower_budget
}

pub(crate) fn eligible_adds(inst: &ImpdInstance, s: &SeedSet, memory: &Memory) -> Vec<u32> {
    (0..inst.node_count() as u32)
        .filter(|&j| !s.contains(j) && is_eligible(inst, &s.with(j), memory))
        .collect()
}

pub(crate) fn eligible_drops(inst: &ImpdInstance, s: &SeedSet, memory: &Memory) -> Vec<u32> {
    s.iter()
        .filter(|&i| is_eligible(inst, &s.without(i), memory))
        .collect()
}

pub(crate) fn eligible_swaps(
    inst: &ImpdInstance,
    s: &SeedSet,
    memory: &Memory,
) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for i in s.iter() {
        let dropped = s.without(i);
        for j in 0..inst.node_count() as u32 {
            if s.contains(j) {
                continue;
            }
            if is_eligible(inst, &dropped.with(j), memory) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Every feasible seed set with no feasible superset, each exactly once, in
/// lexicographic member order. Guarded against oversized enumerations.
pub fn enumerate_maximal_seeds(inst: &ImpdInstance) -> Result<Vec<SeedSet>> {
    let members: Vec<u32> = (0..inst.node_count() as u32).collect();
    let mut out = Vec::new();
    for_each_maximal_subset(
        &members,
        &inst.activation_costs,
        inst.leader_budget,
        &mut |s| {
            if s.is_empty() {
                return Ok(());
            }
            if out.len() >= MAX_ENUMERATED_SEEDS {
                return Err(ImpdError::Guard(format!(
                    "more than {MAX_ENUMERATED_SEEDS} maximal seed sets; complete enumeration refused"
                )));
            }
            out.push(NodeSet::new(s.to_vec()));
            Ok(())
        },
    )?;
    Ok(out)
}

/// Complete enumeration of the leader's maximal seed sets, pricing each one
/// with the evaluator. Value ties resolve to the lexicographically greatest
/// optimum; on the worked example this picks {B, C} over the equally good
/// {A, C} and {A, E}.
pub fn solve_complete_enumeration(ev: &mut SpreadEvaluator) -> Result<(SeedSet, f64)> {
    let seeds = enumerate_maximal_seeds(ev.instance())?;
    let mut best: Option<(SeedSet, f64)> = None;
    for s in seeds {
        let z = ev.evaluate(&s)?;
        if best.as_ref().map_or(true, |(_, zb)| z >= *zb) {
            best = Some((s, z));
        }
    }
    best.ok_or_else(|| ImpdError::Infeasible("no feasible seed set".into()))
}

/// Spread-score initial solution: rank nodes by their singleton spread on a
/// fresh sample; in cost mode keep the top half re-sorted by cost ratio,
/// then fill greedily until the budget is hit.
pub fn initial_solution_score(
    inst: &ImpdInstance,
    score_sample_size: usize,
    rng: &mut impl Rng,
) -> Result<SeedSet> {
    let n = inst.node_count();
    let sample = sample_thresholds_lhs(n, score_sample_size.max(1), rng);
    let mut scored: Vec<(u32, f64)> = (0..n as u32)
        .map(|i| {
            let z = spread(
                &inst.graph,
                &NodeSet::new(vec![i]),
                &NodeSet::empty(),
                &sample,
            )?;
            Ok((i, z))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    if inst.cost_mode == CostMode::CostBased {
        let keep = (n + 1) / 2;
        scored.truncate(keep);
        // Favor influential nodes that are cheap to activate but expensive
        // to deactivate.
        scored.sort_by(|a, b| {
            let ratio = |&(i, _): &(u32, f64)| {
                inst.activation_costs[i as usize] / inst.deactivation_costs[i as usize]
            };
            ratio(a).total_cmp(&ratio(b)).then(a.0.cmp(&b.0))
        });
    }

    Ok(greedy_fill(inst, scored.iter().map(|&(i, _)| i)))
}

/// Cost-only initial solution: activation cost ascending, ties broken by
/// larger deactivation cost.
pub fn initial_solution_cost(inst: &ImpdInstance) -> SeedSet {
    let mut order: Vec<u32> = (0..inst.node_count() as u32).collect();
    order.sort_by(|&a, &b| {
        inst.activation_costs[a as usize]
            .total_cmp(&inst.activation_costs[b as usize])
            .then(
                inst.deactivation_costs[b as usize]
                    .total_cmp(&inst.deactivation_costs[a as usize]),
            )
            .then(a.cmp(&b))
    });
    greedy_fill(inst, order.into_iter())
}

/// Walk a preference list from the head, taking nodes until the first one
/// that would overrun the leader budget.
fn greedy_fill(inst: &ImpdInstance, order: impl Iterator<Item = u32>) -> SeedSet {
    let mut members = Vec::new();
    let mut used = 0.0;
    for i in order {
        let c = inst.activation_costs[i as usize];
        if used + c > inst.leader_budget {
            break;
        }
        members.push(i);
        used += c;
    }
    NodeSet::new(members)
}

/// Mode-appropriate initial solution: spread scores for cardinality
/// instances, pure costs otherwise.
pub fn initial_solution(
    inst: &ImpdInstance,
    score_sample_size: usize,
    rng: &mut impl Rng,
) -> Result<SeedSet> {
    match inst.cost_mode {
        CostMode::Cardinality => initial_solution_score(inst, score_sample_size, rng),
        CostMode::CostBased => Ok(initial_solution_cost(inst)),
    }
}

/// A random budget-maximal seed set built from a shuffled node order.
fn random_solution(inst: &ImpdInstance, rng: &mut impl Rng) -> SeedSet {
    let mut order: Vec<u32> = (0..inst.node_count() as u32).collect();
    order.shuffle(rng);
    let mut members = Vec::new();
    let mut used = 0.0;
    for i in order {
        let c = inst.activation_costs[i as usize];
        if used + c <= inst.leader_budget {
            members.push(i);
            used += c;
        }
    }
    NodeSet::new(members)
}

/// A uniformly chosen eligible neighbor of `s` under a random move type,
/// falling through the remaining types in fixed Add, Drop, Swap order.
pub(crate) fn random_eligible_neighbor(
    inst: &ImpdInstance,
    s: &SeedSet,
    memory: &Memory,
    rng: &mut impl Rng,
) -> Option<(SeedSet, MoveKind)> {
    let moves = available_moves(inst);
    let first = moves[rng.gen_range(0..moves.len())];
    let order = [first]
        .into_iter()
        .chain(moves.iter().copied().filter(move |&m| m != first));
    for kind in order {
        let candidate = match kind {
            MoveKind::Add => {
                let adds = eligible_adds(inst, s, memory);
                adds.choose(rng).map(|&j| s.with(j))
            }
            MoveKind::Drop => {
                let drops = eligible_drops(inst, s, memory);
                drops.choose(rng).map(|&i| s.without(i))
            }
            MoveKind::Swap => {
                let swaps = eligible_swaps(inst, s, memory);
                swaps.choose(rng).map(|&(i, j)| s.without(i).with(j))
            }
        };
        if let Some(c) = candidate {
            return Some((c, kind));
        }
    }
    None
}

/// Ohlmann-style initial temperature: probe random eligible solutions and
/// random neighbors, average the absolute pseudo-objective change, and set
/// the temperature so a mean-sized worsening is accepted with probability
/// `p0`. Probe evaluations share the evaluator cache but do not mark
/// solutions as visited for the subsequent search.
pub fn initial_temperature(
    ev: &mut SpreadEvaluator,
    p0: f64,
    rng: &mut impl Rng,
) -> Result<f64> {
    const TARGET_PAIRS: usize = 20;
    const MAX_ATTEMPTS: usize = 400;

    let inst = ev.instance();
    if !(0.0 < p0 && p0 < 1.0) {
        return Err(ImpdError::InvalidArgument(
            "initial acceptance probability must lie in (0, 1)".into(),
        ));
    }
    let empty = Memory::new(inst.node_count());
    let mut probed: std::collections::HashSet<NodeSet> = Default::default();
    let mut total_delta = 0.0;
    let mut pairs = 0usize;
    for _ in 0..MAX_ATTEMPTS {
        if pairs >= TARGET_PAIRS {
            break;
        }
        let s = random_solution(inst, rng);
        if !is_eligible(inst, &s, &empty) || probed.contains(&s) {
            continue;
        }
        let Some((neighbor, _)) = random_eligible_neighbor(inst, &s, &empty, rng) else {
            continue;
        };
        probed.insert(s.clone());
        let f_s = pseudo_objective(inst, &s, ev.evaluate(&s)?);
        let f_n = pseudo_objective(inst, &neighbor, ev.evaluate(&neighbor)?);
        total_delta += (f_n - f_s).abs();
        pairs += 1;
    }
    if pairs == 0 {
        return Err(ImpdError::Infeasible(
            "no eligible solution found while estimating the initial temperature".into(),
        ));
    }
    if pairs < TARGET_PAIRS {
        log::warn!("initial temperature estimated from only {pairs} probe pairs");
    }
    let mean_delta = total_delta / pairs as f64;
    if mean_delta == 0.0 {
        Ok(1.0)
    } else {
        Ok(-mean_delta / p0.ln())
    }
}

/// Percent improvement of the tabu matheuristic over the annealing one.
pub fn compare_delta(z_sam: f64, z_tsm: f64) -> Result<f64> {
    if z_sam <= 0.0 {
        return Err(ImpdError::InvalidArgument(
            "baseline objective must be positive".into(),
        ));
    }
    Ok(100.0 * (z_tsm - z_sam) / z_sam)
}

/// Convenience wrapper running a named solver from a global seed with the
/// crate's stream-splitting conventions.
pub fn run_sam(
    inst: &ImpdInstance,
    profile: &SaaParams,
    params: &SamParams,
    global_seed: u64,
    replication: u64,
) -> Result<SearchOutcome> {
    let mut ev = SpreadEvaluator::new(inst, profile.clone(), global_seed);
    let mut rng = substream(global_seed, "sam", replication);
    sam_solve(&mut ev, params, &mut rng)
}

pub fn run_tsm(
    inst: &ImpdInstance,
    profile: &SaaParams,
    params: &TsmParams,
    global_seed: u64,
    replication: u64,
) -> Result<SearchOutcome> {
    let mut ev = SpreadEvaluator::new(inst, profile.clone(), global_seed);
    let pathlens = crate::graph::shortest_path_matrix(&inst.graph);
    let mut rng = substream(global_seed, "tsm", replication);
    tsm_solve(&mut ev, &pathlens, params, &mut rng)
}

#[cfg(test)]
mod tests;
