//! Estimate the follower's optimal response with the three-stage sampling
//! scheme and report the statistical lower/upper bounds, gap, and
//! confidence interval.

use impd::instance::{generate_instance, random_feasible_seed, CostMode, InstanceSpec};
use impd::rng::substream;
use impd::saa::{saa_evaluate, SaaParams};

fn main() -> impd::Result<()> {
    let spec = InstanceSpec::new(40, 0.051, CostMode::Cardinality)
        .with_budgets(6.0, 2.0)
        .with_seed(11);
    let inst = generate_instance(&spec)?;

    // A random seed set of 15% of the nodes, as in follower-only studies.
    let mut rng = substream(11, "eval-seed", 0);
    let x = random_feasible_seed(&inst, 6, &mut rng)?;
    println!("seed set {:?}", x.members());

    let params = SaaParams {
        batch_size: 30,
        batch_count: 10,
        select_size: 500,
        final_size: 2000,
        rng_seed: 1,
    };
    let report = saa_evaluate(&inst, &x, &params)?;
    println!("follower best response {:?}", report.best_response.members());
    println!("LB (mean of batch optima)  {:.4}", report.lower_bound);
    println!("UB (large-sample estimate) {:.4}", report.upper_bound);
    println!(
        "gap {:.2}% with 95% CI ({:.2}%, {:.2}%)",
        report.gap_percent(),
        report.ci_lo,
        report.ci_hi
    );
    Ok(())
}
