//! Export the sampled follower model of the worked example in LP format,
//! ready for any external MILP solver.

use impd::diffusion::{NodeSet, ThresholdSample};
use impd::instance::demo;
use impd::lp::{allp_lp_string, DEFAULT_LP_EPSILON};

fn main() -> impd::Result<()> {
    let inst = demo::six_node_instance();
    let x = NodeSet::new(vec![0, 3]);
    // Deterministic thresholds, one realization: the model optimum equals
    // the exact follower response (spread 1 after deactivating node 0).
    let sample = ThresholdSample::constant(&demo::six_node_thresholds(), 1);
    let text = allp_lp_string(&inst, &x, &sample, DEFAULT_LP_EPSILON);

    let path = std::env::temp_dir().join("six_node_follower.lp");
    std::fs::write(&path, &text)?;
    println!("{}", text);
    println!("written to {}", path.display());
    Ok(())
}
