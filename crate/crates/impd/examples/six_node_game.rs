//! The six-node worked example: deterministic thresholds, leader budget 2,
//! follower budget 1. Shows propagation, the follower's exact best
//! response, and the leader optimum by complete enumeration.

use impd::diffusion::{propagate, FixedSampler, NodeSet, ThresholdSample};
use impd::instance::demo;
use impd::saa::{solve_allp_exact, SaaParams};
use impd::search::{solve_complete_enumeration, SpreadEvaluator};

fn main() -> impd::Result<()> {
    let inst = demo::six_node_instance();
    let theta = demo::six_node_thresholds();
    let sample = ThresholdSample::constant(&theta, 1);
    let names = ["A", "B", "C", "D", "E", "F"];
    let show = |s: &NodeSet| -> String {
        s.iter().map(|i| names[i as usize]).collect::<Vec<_>>().join(",")
    };

    // The plain influence-maximization optimum {A, D} reaches everyone...
    let x = NodeSet::new(vec![0, 3]);
    let full = propagate(&inst.graph, &x, &NodeSet::empty(), &theta)?;
    println!("seeds {{{}}} influence {{{}}} with no deactivation", show(&x), show(&full));

    // ...but the follower wipes out all but one node.
    let (y, z) = solve_allp_exact(&inst, &x, &sample)?;
    println!("follower deactivates {{{}}}, spread drops to {z}", show(&y));

    // The game-aware optimum is {B, C}, guaranteeing spread 2.
    let params = SaaParams {
        batch_size: 1,
        batch_count: 2,
        select_size: 2,
        final_size: 2,
        rng_seed: 0,
    };
    let mut ev =
        SpreadEvaluator::with_sampler(&inst, params, 0, Box::new(FixedSampler(theta.clone())));
    let (best, value) = solve_complete_enumeration(&mut ev)?;
    println!("leader optimum {{{}}} with guaranteed spread {value}", show(&best));
    Ok(())
}
