//! Problem instances: graph + costs + budgets, instance synthesis, and the
//! on-disk instance format.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::diffusion::{NodeSet, SeedSet};
use crate::error::{ImpdError, Result};
use crate::graph::{watts_strogatz_at_density, InfluenceGraph};
use crate::rng::substream;

pub const INSTANCE_FORMAT_HEADER: &str = "impd-instance v1";

/// Whether activation/deactivation costs are unit or drawn from a cost set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMode {
    Cardinality,
    CostBased,
}

impl CostMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CostMode::Cardinality => "cardinality",
            CostMode::CostBased => "cost",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cardinality" => Ok(CostMode::Cardinality),
            "cost" => Ok(CostMode::CostBased),
            other => Err(ImpdError::InvalidArgument(format!(
                "unknown cost mode {other:?}"
            ))),
        }
    }
}

/// One problem: graph, per-node activation/deactivation costs, and the
/// leader/follower budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpdInstance {
    pub graph: InfluenceGraph,
    pub activation_costs: Vec<f64>,
    pub deactivation_costs: Vec<f64>,
    pub leader_budget: f64,
    pub follower_budget: f64,
    pub cost_mode: CostMode,
}

impl ImpdInstance {
    pub fn new(
        graph: InfluenceGraph,
        activation_costs: Vec<f64>,
        deactivation_costs: Vec<f64>,
        leader_budget: f64,
        follower_budget: f64,
        cost_mode: CostMode,
    ) -> Result<Self> {
        let inst = ImpdInstance {
            graph,
            activation_costs,
            deactivation_costs,
            leader_budget,
            follower_budget,
            cost_mode,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        if self.activation_costs.len() != n || self.deactivation_costs.len() != n {
            return Err(ImpdError::InvalidArgument(
                "cost vector length does not match node count".into(),
            ));
        }
        if self
            .activation_costs
            .iter()
            .chain(&self.deactivation_costs)
            .any(|&c| !(c > 0.0) || !c.is_finite())
        {
            return Err(ImpdError::InvalidArgument(
                "all costs must be positive and finite".into(),
            ));
        }
        if self.cost_mode == CostMode::Cardinality
            && self
                .activation_costs
                .iter()
                .chain(&self.deactivation_costs)
                .any(|&c| c != 1.0)
        {
            return Err(ImpdError::InvalidArgument(
                "cardinality mode requires unit costs".into(),
            ));
        }
        if n > 0 {
            let min_c = self
                .activation_costs
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if self.leader_budget < min_c {
                return Err(ImpdError::Infeasible(format!(
                    "leader budget {} is below the cheapest activation cost {min_c}",
                    self.leader_budget
                )));
            }
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Mean activation cost over all nodes (the pseudo-objective divisor).
    pub fn mean_activation_cost(&self) -> f64 {
        let n = self.node_count();
        if n == 0 {
            return 1.0;
        }
        self.activation_costs.iter().sum::<f64>() / n as f64
    }

    pub fn activation_cost(&self, s: &NodeSet) -> f64 {
        s.cost(&self.activation_costs)
    }

    pub fn deactivation_cost(&self, s: &NodeSet) -> f64 {
        s.cost(&self.deactivation_costs)
    }

    pub fn is_budget_feasible(&self, s: &SeedSet) -> bool {
        self.activation_cost(s) <= self.leader_budget
    }
}

/// How budgets are fixed when synthesizing an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BudgetRule {
    /// Explicit leader and follower budgets.
    Explicit { leader: f64, follower: f64 },
    /// The leader can afford at most 10% of the nodes (floor-rounded), the
    /// follower can deactivate at most half of such a seed set.
    LeaderFraction,
}

/// Recipe for a synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub node_count: usize,
    pub target_density: f64,
    pub cost_mode: CostMode,
    /// Cost levels drawn uniformly in cost mode.
    pub cost_set: Vec<f64>,
    pub budget_rule: BudgetRule,
    pub rewire_prob: f64,
    pub rng_seed: u64,
}

impl InstanceSpec {
    pub fn new(node_count: usize, target_density: f64, cost_mode: CostMode) -> Self {
        InstanceSpec {
            node_count,
            target_density,
            cost_mode,
            cost_set: vec![10.0, 15.0, 20.0],
            budget_rule: BudgetRule::LeaderFraction,
            rewire_prob: 0.1,
            rng_seed: 0,
        }
    }

    pub fn with_budgets(mut self, leader: f64, follower: f64) -> Self {
        self.budget_rule = BudgetRule::Explicit {
            leader,
            follower,
        };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.target_density > 0.0 && self.target_density <= 1.0) {
            return Err(ImpdError::InvalidArgument(
                "target density must lie in (0, 1]".into(),
            ));
        }
        if self.cost_set.is_empty() || self.cost_set.iter().any(|&c| c <= 0.0) {
            return Err(ImpdError::InvalidArgument(
                "cost set must be nonempty and positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.rewire_prob) {
            return Err(ImpdError::InvalidArgument(
                "rewire probability must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// One-line provenance string stored in saved instance files.
    pub fn provenance(&self) -> String {
        format!(
            "n={} d={:?} mode={} cost_set={:?} budget_rule={:?} rewire={:?} seed={}",
            self.node_count,
            self.target_density,
            self.cost_mode.as_str(),
            self.cost_set,
            self.budget_rule,
            self.rewire_prob,
            self.rng_seed
        )
    }
}

/// Synthesize an instance from a spec. Deterministic in `spec.rng_seed`.
pub fn generate_instance(spec: &InstanceSpec) -> Result<ImpdInstance> {
    spec.validate()?;
    let n = spec.node_count;
    let mut graph_rng = substream(spec.rng_seed, "instance-graph", 0);
    let graph = watts_strogatz_at_density(n, spec.target_density, spec.rewire_prob, &mut graph_rng)?;

    let mut cost_rng = substream(spec.rng_seed, "instance-costs", 0);
    let (activation_costs, deactivation_costs) = match spec.cost_mode {
        CostMode::Cardinality => (vec![1.0; n], vec![1.0; n]),
        CostMode::CostBased => {
            let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
                (0..n)
                    .map(|_| *spec.cost_set.choose(rng).unwrap())
                    .collect()
            };
            (draw(&mut cost_rng), draw(&mut cost_rng))
        }
    };

    let (leader_budget, follower_budget) = match spec.budget_rule {
        BudgetRule::Explicit { leader, follower } => (leader, follower),
        BudgetRule::LeaderFraction => {
            let k_max = (0.10 * n as f64).floor().max(1.0);
            let c_bar = activation_costs.iter().sum::<f64>() / n as f64;
            let e_bar = deactivation_costs.iter().sum::<f64>() / n as f64;
            let leader = (k_max * c_bar).floor();
            let follower = ((k_max / 2.0).floor() * e_bar).floor();
            (leader, follower)
        }
    };

    ImpdInstance::new(
        graph,
        activation_costs,
        deactivation_costs,
        leader_budget,
        follower_budget,
        spec.cost_mode,
    )
}

/// Uniform random k-subset of the nodes (used for follower-only experiments
/// with a fixed seed size).
pub fn random_feasible_seed(inst: &ImpdInstance, k: usize, rng: &mut impl Rng) -> Result<SeedSet> {
    let n = inst.node_count();
    if k > n {
        return Err(ImpdError::InvalidArgument(format!(
            "seed size {k} exceeds node count {n}"
        )));
    }
    let mut ids: Vec<u32> = (0..n as u32).collect();
    ids.shuffle(rng);
    Ok(NodeSet::new(ids[..k].to_vec()))
}

/// Serialize an instance to the versioned text format.
pub fn instance_to_string(inst: &ImpdInstance, provenance: &str) -> String {
    let mut out = String::new();
    writeln!(out, "{INSTANCE_FORMAT_HEADER}").unwrap();
    if !provenance.is_empty() {
        writeln!(out, "# provenance: {provenance}").unwrap();
    }
    writeln!(out, "mode {}", inst.cost_mode.as_str()).unwrap();
    writeln!(out, "nodes {}", inst.node_count()).unwrap();
    writeln!(out, "leader_budget {:?}", inst.leader_budget).unwrap();
    writeln!(out, "follower_budget {:?}", inst.follower_budget).unwrap();
    let join = |xs: &[f64]| {
        xs.iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "activation_costs {}", join(&inst.activation_costs)).unwrap();
    writeln!(out, "deactivation_costs {}", join(&inst.deactivation_costs)).unwrap();
    writeln!(out, "arcs {}", inst.graph.arc_count()).unwrap();
    for &(t, h, w) in inst.graph.arcs() {
        writeln!(out, "{t} {h} {w:?}").unwrap();
    }
    out
}

pub fn save_instance(inst: &ImpdInstance, path: impl AsRef<Path>, provenance: &str) -> Result<()> {
    std::fs::write(path, instance_to_string(inst, provenance))?;
    Ok(())
}

pub fn parse_instance(text: &str, origin: &str) -> Result<ImpdInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let err = |line: usize, msg: String| ImpdError::Parse {
        path: origin.to_string(),
        line,
        msg,
    };

    let (line, header) = lines
        .next()
        .ok_or_else(|| err(0, "empty instance file".into()))?;
    if header != INSTANCE_FORMAT_HEADER {
        return Err(err(
            line,
            format!("unsupported format header {header:?}, expected {INSTANCE_FORMAT_HEADER:?}"),
        ));
    }

    let mut field = |name: &str| -> Result<(usize, String)> {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(usize::MAX, format!("truncated file: missing {name}")))?;
        let rest = l
            .strip_prefix(name)
            .ok_or_else(|| err(line, format!("expected {name:?}, found {l:?}")))?;
        Ok((line, rest.trim().to_string()))
    };

    let (line, mode) = field("mode")?;
    let cost_mode = CostMode::parse(&mode).map_err(|e| err(line, e.to_string()))?;
    let (line, nodes) = field("nodes")?;
    let n: usize = nodes
        .parse()
        .map_err(|_| err(line, "invalid node count".into()))?;
    let parse_f = |line: usize, s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| err(line, format!("invalid {what}: {s:?}")))
    };
    let (line, lb) = field("leader_budget")?;
    let leader_budget = parse_f(line, &lb, "leader budget")?;
    let (line, fb) = field("follower_budget")?;
    let follower_budget = parse_f(line, &fb, "follower budget")?;
    let parse_costs = |line: usize, s: &str, what: &str| -> Result<Vec<f64>> {
        let v: Vec<f64> = s
            .split_whitespace()
            .map(|t| parse_f(line, t, what))
            .collect::<Result<_>>()?;
        if v.len() != n {
            return Err(err(line, format!("{what} has {} entries, expected {n}", v.len())));
        }
        Ok(v)
    };
    let (line, ac) = field("activation_costs")?;
    let activation_costs = parse_costs(line, &ac, "activation cost")?;
    let (line, dc) = field("deactivation_costs")?;
    let deactivation_costs = parse_costs(line, &dc, "deactivation cost")?;
    let (line, m_str) = field("arcs")?;
    let m: usize = m_str
        .parse()
        .map_err(|_| err(line, "invalid arc count".into()))?;

    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, l) = lines
            .next()
            .ok_or_else(|| err(usize::MAX, "truncated file: missing arcs".into()))?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(err(line, format!("expected 'tail head weight', found {l:?}")));
        }
        let tail: usize = parts[0]
            .parse()
            .map_err(|_| err(line, "invalid tail".into()))?;
        let head: usize = parts[1]
            .parse()
            .map_err(|_| err(line, "invalid head".into()))?;
        let weight = parse_f(line, parts[2], "weight")?;
        arcs.push((tail, head, weight));
    }

    let graph = InfluenceGraph::build(n, &arcs)?;
    ImpdInstance::new(
        graph,
        activation_costs,
        deactivation_costs,
        leader_budget,
        follower_budget,
        cost_mode,
    )
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ImpdInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text, &path.display().to_string())
}

/// The six-node deterministic worked example used throughout the golden
/// tests: nodes A..F as 0..5, unit costs, leader budget 2, follower budget 1.
pub mod demo {
    use super::*;

    pub fn six_node_graph() -> InfluenceGraph {
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

    pub fn six_node_instance() -> ImpdInstance {
        ImpdInstance::new(
            six_node_graph(),
            vec![1.0; 6],
            vec![1.0; 6],
            2.0,
            1.0,
            CostMode::Cardinality,
        )
        .unwrap()
    }

    /// The fixed thresholds of the worked example.
    pub fn six_node_thresholds() -> Vec<f64> {
        vec![0.3, 0.6, 0.8, 0.4, 0.1, 0.5]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn generate_is_deterministic_and_round_trips() {
        let spec = InstanceSpec::new(20, 0.105, CostMode::Cardinality)
            .with_budgets(3.0, 1.0)
            .with_seed(42);
        let a = generate_instance(&spec).unwrap();
        let b = generate_instance(&spec).unwrap();
        assert_eq!(a, b);
        assert!((a.graph.arc_count() as i64 - 40).abs() <= 2);

        let text = instance_to_string(&a, &spec.provenance());
        let text2 = instance_to_string(&b, &spec.provenance());
        assert_eq!(text, text2);
        let back = parse_instance(&text, "mem").unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn cost_mode_shapes() {
        let spec = InstanceSpec::new(40, 0.103, CostMode::CostBased)
            .with_budgets(60.0, 30.0)
            .with_seed(7);
        let inst = generate_instance(&spec).unwrap();
        // Ring degree 4 over 40 nodes gives 160 arcs.
        assert!((inst.graph.arc_count() as i64 - 160).abs() <= 5);
        assert!(inst
            .activation_costs
            .iter()
            .all(|c| [10.0, 15.0, 20.0].contains(c)));
        assert_eq!(inst.leader_budget, 60.0);
        assert_eq!(inst.follower_budget, 30.0);
    }

    #[test]
    fn cost_draws_are_marginally_uniform() {
        // Chi-square over 10,000 draws, 2 dof, alpha = 0.01 -> critical 9.21.
        let mut counts = [0usize; 3];
        let levels = [10.0, 15.0, 20.0];
        let n_specs = 10_000 / 40;
        for seed in 0..n_specs as u64 {
            let spec = InstanceSpec::new(40, 0.103, CostMode::CostBased)
                .with_budgets(60.0, 30.0)
                .with_seed(1000 + seed);
            let inst = generate_instance(&spec).unwrap();
            for c in &inst.activation_costs {
                counts[levels.iter().position(|l| l == c).unwrap()] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        let expected = total as f64 / 3.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 9.21, "chi-square {chi2}");
    }

    #[test]
    fn leader_fraction_budgets() {
        let spec = InstanceSpec::new(40, 0.05, CostMode::CostBased).with_seed(3);
        let inst = generate_instance(&spec).unwrap();
        // k_max = 4 affordable nodes at mean cost, follower at most half.
        let c_bar = inst.mean_activation_cost();
        assert!((inst.leader_budget - (4.0 * c_bar).floor()).abs() < 1e-9);
        assert!(inst.follower_budget > 0.0);
    }

    #[test]
    fn random_seed_sizes() {
        let spec = InstanceSpec::new(20, 0.105, CostMode::Cardinality)
            .with_budgets(3.0, 1.0)
            .with_seed(5);
        let inst = generate_instance(&spec).unwrap();
        let mut rng = substream(5, "seed", 0);
        assert!(random_feasible_seed(&inst, 0, &mut rng).unwrap().is_empty());
        assert_eq!(random_feasible_seed(&inst, 3, &mut rng).unwrap().len(), 3);
        assert_eq!(random_feasible_seed(&inst, 20, &mut rng).unwrap().len(), 20);
        assert!(random_feasible_seed(&inst, 21, &mut rng).is_err());
    }

    #[test]
    fn truncated_file_reports_error() {
        let inst = demo::six_node_instance();
        let text = instance_to_string(&inst, "demo");
        let cut = &text[..text.len() / 2];
        assert!(matches!(
            parse_instance(cut, "mem"),
            Err(ImpdError::Parse { .. })
        ));
    }

    #[test]
    fn golden_demo_file_loads() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/six_node.impd");
        let loaded = load_instance(path).unwrap();
        assert_eq!(loaded, demo::six_node_instance());
    }

    #[test]
    fn cardinality_requires_unit_costs() {
        let g = demo::six_node_graph();
        assert!(ImpdInstance::new(
            g,
            vec![2.0; 6],
            vec![1.0; 6],
            2.0,
            1.0,
            CostMode::Cardinality
        )
        .is_err());
    }
}
