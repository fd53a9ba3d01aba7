//! Detects a second-order dependency in hand-made citation chains and shows
//! the rewired network.

use citerank::hon::{count_subchains, detect_higher_order, rewire, FirstOrderGraph, LogBase, MinSupport};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names = ["a", "b", "c", "d", "x"];
    let labels = names.iter().map(|s| s.to_string()).collect();
    let graph = FirstOrderGraph::from_edges(labels, [(0, 1, 1.0), (4, 1, 1.0), (1, 2, 1.0), (1, 3, 1.0)]);

    // Chains through a always continue to c; chains through x mostly go to d,
    // but not far enough from b's overall split to pass the threshold.
    let mut chains = vec![vec![0, 1, 2]; 120];
    chains.extend(std::iter::repeat_n(vec![4, 1, 2], 20));
    chains.extend(std::iter::repeat_n(vec![4, 1, 3], 100));

    let counts = count_subchains(&chains, 2);
    let nodes = detect_higher_order(&counts, 2, MinSupport::At(50), LogBase::Natural);
    for n in &nodes {
        println!("{:?}: support {}, D = {:.4} > {:.4}", n.path, n.support, n.divergence, n.threshold);
    }
    let hon = rewire(&graph, &counts, &nodes)?;
    println!("\n{} nodes ({} higher-order)", hon.node_count(), hon.higher_order_count());
    hon.write_edges_csv(std::io::stdout())?;
    Ok(())
}
