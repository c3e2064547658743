//! Simulated-annealing matheuristic over the leader's seed-set space.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::{ImpdError, Result};
use crate::instance::CostMode;

use super::{
    initial_solution, initial_temperature, is_eligible, pseudo_objective,
    random_eligible_neighbor, Memory, SearchOutcome, SpreadEvaluator, TracePoint,
};

/// Tunables of the annealing matheuristic.
#[derive(Debug, Clone)]
pub struct SamParams {
    /// Initial acceptance probability for a mean-sized worsening move.
    pub initial_acceptance: f64,
    /// Geometric cooling ratio applied when acceptance is low.
    pub cooling_ratio: f64,
    /// Per-cycle growth factor of the cycle length.
    pub cycle_growth: f64,
    /// Accepted-move fraction above which the temperature is halved.
    pub accept_threshold: f64,
    /// Wall-clock budget for the search loop.
    pub time_limit: Duration,
    /// Realizations used to score nodes for the initial solution.
    pub score_sample_size: usize,
}

impl Default for SamParams {
    fn default() -> Self {
        SamParams {
            initial_acceptance: 0.8,
            cooling_ratio: 0.9,
            cycle_growth: 0.2,
            accept_threshold: 0.5,
            time_limit: Duration::from_secs(60),
            score_sample_size: 200,
        }
    }
}

impl SamParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.initial_acceptance && self.initial_acceptance < 1.0) {
            return Err(ImpdError::InvalidArgument(
                "initial acceptance must lie in (0, 1)".into(),
            ));
        }
        if !(0.0 < self.cooling_ratio && self.cooling_ratio < 1.0) {
            return Err(ImpdError::InvalidArgument(
                "cooling ratio must lie in (0, 1)".into(),
            ));
        }
        if !(0.0 < self.cycle_growth && self.cycle_growth < 1.0) {
            return Err(ImpdError::InvalidArgument(
                "cycle growth must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Initial cycle length: the average neighborhood size of a seed set of
/// size `k`, over the move types available for the instance.
fn initial_cycle_length(n: usize, k: usize, mode: CostMode) -> f64 {
    let n = n as f64;
    let k = k as f64;
    let swap = (n - k) * k;
    match mode {
        CostMode::Cardinality => swap.max(1.0),
        CostMode::CostBased => ((k + (n - k) + swap) / 3.0).max(1.0),
    }
}

/// Run the annealing matheuristic. Every candidate is priced by `ev`, and
/// the incumbent tracks the raw spread estimate rather than the
/// pseudo-objective.
pub fn sam_solve(
    ev: &mut SpreadEvaluator,
    params: &SamParams,
    rng: &mut impl Rng,
) -> Result<SearchOutcome> {
    params.validate()?;
    let inst = ev.instance();
    let start = Instant::now();

    let mut temperature = initial_temperature(ev, params.initial_acceptance, rng)?;
    let mut memory = Memory::new(inst.node_count());

    let mut current = initial_solution(inst, params.score_sample_size, rng)?;
    if !is_eligible(inst, &current, &memory) {
        return Err(ImpdError::Infeasible(
            "initial solution is not eligible".into(),
        ));
    }
    let mut current_z = ev.evaluate(&current)?;
    let mut current_f = pseudo_objective(inst, &current, current_z);
    memory.record(&current, current_z);

    let mut best = current.clone();
    let mut best_z = current_z;
    let mut trace = vec![TracePoint {
        wall_secs: start.elapsed().as_secs_f64(),
        iteration: 0,
        incumbent_value: best_z,
        current_value: current_z,
        control: temperature,
        move_kind: None,
    }];
    let mut move_counts = [0u64; 3];
    let mut iterations = 0u64;
    let mut exhausted = false;

    let mut cycle_len = initial_cycle_length(
        inst.node_count(),
        current.len(),
        inst.cost_mode,
    );

    'outer: while start.elapsed() <= params.time_limit {
        let mut accepted = 0u64;
        let this_cycle = cycle_len.ceil() as u64;
        for _ in 0..this_cycle {
            if start.elapsed() > params.time_limit {
                break;
            }
            let Some((neighbor, kind)) = random_eligible_neighbor(inst, &current, &memory, rng)
            else {
                exhausted = true;
                break 'outer;
            };
            iterations += 1;
            move_counts[kind.index()] += 1;
            let neighbor_z = ev.evaluate(&neighbor)?;
            memory.record(&neighbor, neighbor_z);
            let neighbor_f = pseudo_objective(inst, &neighbor, neighbor_z);

            if neighbor_z > best_z {
                best = neighbor.clone();
                best_z = neighbor_z;
            }

            let delta = neighbor_f - current_f;
            if delta >= 0.0 || (delta / temperature).exp() > rng.gen::<f64>() {
                current = neighbor;
                current_z = neighbor_z;
                current_f = neighbor_f;
                accepted += 1;
            }

            trace.push(TracePoint {
                wall_secs: start.elapsed().as_secs_f64(),
                iteration: iterations,
                incumbent_value: best_z,
                current_value: current_z,
                control: temperature,
                move_kind: Some(kind),
            });
        }
        if accepted as f64 / this_cycle as f64 > params.accept_threshold {
            temperature /= 2.0;
        } else {
            temperature *= params.cooling_ratio;
        }
        cycle_len *= 1.0 + params.cycle_growth;
    }

    Ok(SearchOutcome {
        best,
        best_value: best_z,
        trace,
        move_counts,
        iterations,
        exhausted,
    })
}
