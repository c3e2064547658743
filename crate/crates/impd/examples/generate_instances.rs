//! Synthesize small-world instances at the benchmark shapes and print
//! their realized densities and budgets.

use impd::instance::{generate_instance, CostMode, InstanceSpec};

fn main() -> impd::Result<()> {
    for &(n, density) in &[(20usize, 0.105), (40, 0.051), (60, 0.068)] {
        for mode in [CostMode::Cardinality, CostMode::CostBased] {
            let spec = InstanceSpec::new(n, density, mode).with_seed(7);
            let inst = generate_instance(&spec)?;
            println!(
                "n={n:3} target_d={density:.3} realized_d={:.3} mode={:11} C={:5} E={:5}",
                inst.graph.density()?,
                mode.as_str(),
                inst.leader_budget,
                inst.follower_budget,
            );
        }
    }
    Ok(())
}
