//! Solve the leader's problem with the simulated-annealing matheuristic
//! and compare against complete enumeration on a small instance.

use std::time::Duration;

use impd::instance::{generate_instance, CostMode, InstanceSpec};
use impd::saa::SaaParams;
use impd::search::{run_sam, solve_complete_enumeration, SamParams, SpreadEvaluator};

fn main() -> impd::Result<()> {
    let spec = InstanceSpec::new(20, 0.105, CostMode::Cardinality)
        .with_budgets(3.0, 1.0)
        .with_seed(3);
    let inst = generate_instance(&spec)?;

    let profile = SaaParams {
        batch_size: 20,
        batch_count: 5,
        select_size: 200,
        final_size: 500,
        rng_seed: 0,
    };
    let params = SamParams {
        time_limit: Duration::from_secs(20),
        ..SamParams::default()
    };
    let outcome = run_sam(&inst, &profile, &params, 99, 0)?;
    println!(
        "annealing best {:?} value {:.4} after {} iterations (exhausted: {})",
        outcome.best.members(),
        outcome.best_value,
        outcome.iterations,
        outcome.exhausted
    );
    println!(
        "moves: {} adds, {} drops, {} swaps",
        outcome.move_counts[0], outcome.move_counts[1], outcome.move_counts[2]
    );

    let mut ev = SpreadEvaluator::new(&inst, profile, 99);
    let (opt, z_opt) = solve_complete_enumeration(&mut ev)?;
    println!("enumeration optimum {:?} value {z_opt:.4}", opt.members());
    println!(
        "gap {:.2}%",
        100.0 * (z_opt - outcome.best_value) / z_opt
    );
    Ok(())
}
