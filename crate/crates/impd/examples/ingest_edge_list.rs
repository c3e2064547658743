//! Ingest a plain edge list, extract the densest part of the network, and
//! turn it into a solvable instance.

use impd::bench::run_ingest;
use impd::graph::load_edge_list;
use impd::instance::{BudgetRule, CostMode};

fn main() -> impd::Result<()> {
    let dir = std::env::temp_dir().join("impd-ingest-example");
    std::fs::create_dir_all(&dir)?;

    // A small collaboration-style network; weights default to 1/out-degree
    // when the file has none.
    let edges = dir.join("collab.txt");
    std::fs::write(
        &edges,
        "# tail head\n0 1\n0 2\n1 2\n2 3\n3 4\n4 0\n4 5\n5 6\n6 4\n6 7\n7 0\n",
    )?;

    let g = load_edge_list(&edges)?;
    println!(
        "loaded {} nodes, {} arcs, avg out-degree {:.2}",
        g.node_count(),
        g.arc_count(),
        g.arc_count() as f64 / g.node_count() as f64
    );

    let report = run_ingest(
        &edges,
        Some(5),
        CostMode::Cardinality,
        BudgetRule::Explicit {
            leader: 2.0,
            follower: 1.0,
        },
        &[],
        0,
        &dir,
    )?;
    println!(
        "subgraph: {} nodes, {} arcs, avg out-degree {:.2}",
        report.node_count, report.arc_count, report.avg_out_degree
    );
    println!("instance written to {}", report.instance_path.display());
    Ok(())
}
