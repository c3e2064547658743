//! Tabu-search matheuristic with a shortest-path candidate-list strategy.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::diffusion::SeedSet;
use crate::error::{ImpdError, Result};
use crate::graph::PathLengthMatrix;

use super::{
    available_moves, eligible_adds, eligible_drops, eligible_swaps, initial_solution,
    is_eligible, pseudo_objective, Memory, MoveKind, SearchOutcome, SpreadEvaluator, TracePoint,
};

/// Tunables of the tabu matheuristic.
#[derive(Debug, Clone)]
pub struct TsmParams {
    /// Fraction of a move's neighborhood admitted to the candidate list.
    pub candidate_fraction: f64,
    /// Weight of the node-frequency diversification penalty.
    pub frequency_penalty: f64,
    /// Wall-clock budget for the search loop.
    pub time_limit: Duration,
    /// Realizations used to score nodes for the initial solution.
    pub score_sample_size: usize,
}

impl Default for TsmParams {
    fn default() -> Self {
        TsmParams {
            candidate_fraction: 0.5,
            frequency_penalty: 1.0,
            time_limit: Duration::from_secs(60),
            score_sample_size: 200,
        }
    }
}

impl TsmParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.candidate_fraction && self.candidate_fraction <= 1.0) {
            return Err(ImpdError::InvalidArgument(
                "candidate fraction must lie in (0, 1]".into(),
            ));
        }
        if self.frequency_penalty < 0.0 {
            return Err(ImpdError::InvalidArgument(
                "frequency penalty must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Distance score of adding node `j` to seed set `s`: the total `-log`
/// shortest-path length from the current seeds to `j`. A large score means
/// `j` is weakly influenced by the seeds, so adding it is promising.
fn add_score(pathlens: &PathLengthMatrix, s: &SeedSet, j: u32) -> f64 {
    s.iter().map(|i| pathlens.get(i as usize, j as usize)).sum()
}

/// The candidate neighbors for one move type, already capped per the
/// candidate-list strategy.
pub(super) fn candidates(
    kind: MoveKind,
    ev: &SpreadEvaluator,
    pathlens: &PathLengthMatrix,
    s: &SeedSet,
    memory: &Memory,
    fraction: f64,
) -> Vec<SeedSet> {
    let inst = ev.instance();
    let outside = inst.node_count() - s.len();
    match kind {
        MoveKind::Add => {
            let mut adds: Vec<(u32, f64)> = eligible_adds(inst, s, memory)
                .into_iter()
                .map(|j| (j, add_score(pathlens, s, j)))
                .collect();
            adds.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let cap = (fraction * outside as f64).ceil() as usize;
            adds.truncate(cap.max(1));
            adds.into_iter().map(|(j, _)| s.with(j)).collect()
        }
        // The drop neighborhood is at most |S|, so every eligible drop is
        // evaluated.
        MoveKind::Drop => eligible_drops(inst, s, memory)
            .into_iter()
            .map(|i| s.without(i))
            .collect(),
        MoveKind::Swap => {
            let mut swaps: Vec<((u32, u32), f64)> = eligible_swaps(inst, s, memory)
                .into_iter()
                .map(|(i, j)| ((i, j), add_score(pathlens, &s.without(i), j)))
                .collect();
            swaps.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let cap = (fraction * outside as f64 * s.len() as f64).ceil() as usize;
            swaps.truncate(cap.max(1));
            swaps
                .into_iter()
                .map(|((i, j), _)| s.without(i).with(j))
                .collect()
        }
    }
}

/// Run the tabu matheuristic. Candidates are ranked by the pseudo-objective
/// minus the frequency penalty; the incumbent tracks the raw spread
/// estimate. `pathlens` is the all-pairs shortest-path preprocessing of the
/// instance graph.
pub fn tsm_solve(
    ev: &mut SpreadEvaluator,
    pathlens: &PathLengthMatrix,
    params: &TsmParams,
    rng: &mut impl Rng,
) -> Result<SearchOutcome> {
    params.validate()?;
    let inst = ev.instance();
    if pathlens.node_count() != inst.node_count() {
        return Err(ImpdError::InvalidArgument(
            "path-length matrix does not match the instance graph".into(),
        ));
    }
    let start = Instant::now();
    let mut memory = Memory::new(inst.node_count());

    let mut current = initial_solution(inst, params.score_sample_size, rng)?;
    if !is_eligible(inst, &current, &memory) {
        return Err(ImpdError::Infeasible(
            "initial solution is not eligible".into(),
        ));
    }
    let mut current_z = ev.evaluate(&current)?;
    memory.record(&current, current_z);

    let mut best = current.clone();
    let mut best_z = current_z;
    let mut trace = vec![TracePoint {
        wall_secs: start.elapsed().as_secs_f64(),
        iteration: 0,
        incumbent_value: best_z,
        current_value: current_z,
        control: params.candidate_fraction,
        move_kind: None,
    }];
    let mut move_counts = [0u64; 3];
    let mut iterations = 0u64;
    let mut exhausted = false;

    let moves = available_moves(inst);
    while start.elapsed() <= params.time_limit {
        // Node frequencies are frozen for the duration of the iteration so
        // every candidate is penalized against the same memory state.
        let freq = memory.frequencies();
        let penalty = |s: &SeedSet| -> f64 {
            params.frequency_penalty * s.iter().map(|i| freq[i as usize]).sum::<f64>()
        };

        let first = moves[rng.gen_range(0..moves.len())];
        let order = [first]
            .into_iter()
            .chain(moves.iter().copied().filter(move |&m| m != first));

        let mut chosen: Option<(SeedSet, MoveKind)> = None;
        for kind in order {
            let cands = candidates(
                kind,
                ev,
                pathlens,
                &current,
                &memory,
                params.candidate_fraction,
            );
            if cands.is_empty() {
                continue;
            }
            let mut best_cand: Option<(SeedSet, f64, f64)> = None;
            for cand in cands {
                let z = ev.evaluate(&cand)?;
                let score = pseudo_objective(inst, &cand, z) - penalty(&cand);
                if best_cand
                    .as_ref()
                    .map_or(true, |(_, _, s)| score > *s)
                {
                    best_cand = Some((cand, z, score));
                }
            }
            let (cand, z, _) = best_cand.unwrap();
            memory.record(&cand, z);
            chosen = Some((cand, kind));
            break;
        }
        let Some((next, kind)) = chosen else {
            exhausted = true;
            break;
        };

        iterations += 1;
        move_counts[kind.index()] += 1;
        current_z = memory.value_of(&next).expect("recorded above");
        current = next;
        if current_z > best_z {
            best = current.clone();
            best_z = current_z;
        }
        trace.push(TracePoint {
            wall_secs: start.elapsed().as_secs_f64(),
            iteration: iterations,
            incumbent_value: best_z,
            current_value: current_z,
            control: params.candidate_fraction,
            move_kind: Some(kind),
        });
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
