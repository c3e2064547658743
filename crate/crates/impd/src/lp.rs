//! LP-format export of the sampled follower model, for cross-checking the
//! exact oracle against any external MILP solver.
//!
//! Variables: `y_i` (deactivate node i) and `u_i_r` (node i influenced in
//! realization r). The objective is the mean influenced count; constraints
//! are the follower budget, the seed coupling rows, and the threshold rows
//! with a small epsilon making "weight equals threshold" activating.

use std::fmt::Write as _;
use std::path::Path;

use crate::diffusion::{SeedSet, ThresholdSample};
use crate::error::Result;
use crate::instance::ImpdInstance;

pub const DEFAULT_LP_EPSILON: f64 = 1e-6;

/// Render the sampled follower model in LP text format.
pub fn allp_lp_string(
    inst: &ImpdInstance,
    x: &SeedSet,
    sample: &ThresholdSample,
    epsilon: f64,
) -> String {
    let n = inst.node_count();
    let n_real = sample.realization_count();
    let prob = 1.0 / n_real as f64;
    let mut out = String::new();

    writeln!(out, "\\ sampled follower model: {n} nodes, {n_real} realizations").unwrap();
    writeln!(out, "Minimize").unwrap();
    let mut obj_terms = Vec::with_capacity(n * n_real);
    for r in 0..n_real {
        for i in 0..n {
            obj_terms.push(format!("{prob} u_{i}_{r}"));
        }
    }
    writeln!(out, " obj: {}", obj_terms.join(" + ")).unwrap();

    writeln!(out, "Subject To").unwrap();
    // Follower budget.
    let budget_terms: Vec<String> = (0..n)
        .map(|i| format!("{} y_{i}", inst.deactivation_costs[i]))
        .collect();
    writeln!(
        out,
        " budget: {} <= {}",
        budget_terms.join(" + "),
        inst.follower_budget
    )
    .unwrap();
    // Coupling to the fixed leader decision, one row per seed node.
    for i in x.iter() {
        writeln!(out, " couple_{i}: y_{i} <= 1").unwrap();
    }
    // Non-deactivated seeds are influenced by default.
    for r in 0..n_real {
        for i in 0..n {
            if x.contains(i as u32) {
                writeln!(out, " seed_{i}_{r}: u_{i}_{r} + y_{i} >= 1").unwrap();
            } else {
                writeln!(out, " seed_{i}_{r}: u_{i}_{r} >= 0").unwrap();
            }
        }
    }
    // Threshold rows: u_ir + y_i - sum_j w_ji u_jr >= eps - theta_ir.
    for r in 0..n_real {
        let theta = sample.realization(r);
        for i in 0..n {
            let mut row = format!(" thr_{i}_{r}: u_{i}_{r} + y_{i}");
            for &(j, w) in inst.graph.in_neighbors(i) {
                write!(row, " - {w} u_{j}_{r}").unwrap();
            }
            writeln!(out, "{row} >= {}", epsilon - theta[i]).unwrap();
        }
    }

    writeln!(out, "Bounds").unwrap();
    for i in 0..n as u32 {
        if !x.contains(i) {
            writeln!(out, " y_{i} = 0").unwrap();
        }
    }

    writeln!(out, "Binaries").unwrap();
    let mut bins: Vec<String> = (0..n).map(|i| format!("y_{i}")).collect();
    for r in 0..n_real {
        for i in 0..n {
            bins.push(format!("u_{i}_{r}"));
        }
    }
    for chunk in bins.chunks(16) {
        writeln!(out, " {}", chunk.join(" ")).unwrap();
    }
    writeln!(out, "End").unwrap();
    out
}

/// Write the model to a file.
pub fn export_allp_lp(
    inst: &ImpdInstance,
    x: &SeedSet,
    sample: &ThresholdSample,
    epsilon: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    std::fs::write(path, allp_lp_string(inst, x, sample, epsilon))?;
    Ok(())
}
