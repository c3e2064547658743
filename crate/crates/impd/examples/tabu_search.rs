//! Solve the leader's problem with the tabu-search matheuristic, whose
//! candidate lists are ranked by shortest-path influence scores.

use std::time::Duration;

use impd::instance::{generate_instance, CostMode, InstanceSpec};
use impd::saa::SaaParams;
use impd::search::{run_tsm, TsmParams};

fn main() -> impd::Result<()> {
    let spec = InstanceSpec::new(30, 0.138, CostMode::CostBased).with_seed(4);
    let inst = generate_instance(&spec)?;
    println!(
        "n={} m={} C={} E={}",
        inst.node_count(),
        inst.graph.arc_count(),
        inst.leader_budget,
        inst.follower_budget
    );

    let profile = SaaParams {
        batch_size: 20,
        batch_count: 5,
        select_size: 200,
        final_size: 500,
        rng_seed: 0,
    };
    let params = TsmParams {
        candidate_fraction: 0.5,
        frequency_penalty: 1.0,
        time_limit: Duration::from_secs(20),
        score_sample_size: 200,
    };
    let outcome = run_tsm(&inst, &profile, &params, 123, 0)?;
    println!(
        "tabu best {:?} value {:.4} after {} iterations",
        outcome.best.members(),
        outcome.best_value,
        outcome.iterations
    );
    for point in outcome.trace.iter().take(5) {
        println!(
            "  iter {:3} incumbent {:.4} current {:.4} move {}",
            point.iteration,
            point.incumbent_value,
            point.current_value,
            point.move_kind.map_or("init", |m| m.as_str())
        );
    }
    Ok(())
}
