//! Classical and quantum PageRank on a small citation graph, with the
//! per-step probabilities of one node.

use citerank::hon::{build_transition_matrix, FirstOrderGraph, HigherOrderGraph};
use citerank::rank::{classical_pagerank, impact_scores, prepare_initial_state, WalkOperator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Edges point from citing to cited paper; 4 cites nothing.
    let edges = [(0, 1), (0, 2), (1, 2), (2, 4), (3, 2), (3, 4), (5, 3), (5, 4)];
    let hon = HigherOrderGraph::first_order_only(&FirstOrderGraph::unweighted(6, &edges));
    let g = build_transition_matrix(&hon, 0.85)?;

    let classical = classical_pagerank(&g, 1e-12, 10_000)?;
    let walk = WalkOperator::new(&g)?;
    let quantum = impact_scores(&walk, &prepare_initial_state(&g)?, 64, &hon.base_map())?;

    println!("{:<6} {:>10} {:>10}", "paper", "classical", "quantum");
    for (i, (c, q)) in classical.iter().zip(&quantum.scores).enumerate() {
        println!("{:<6} {:>10.6} {:>10.6}", hon.label(i), c, q);
    }
    println!("convergence gap {:.2e}, renormalizations {}", quantum.convergence_gap, quantum.renormalizations);

    let p4: Vec<String> = quantum.series.rows.iter().take(9).map(|r| format!("{:.3}", r[4])).collect();
    println!("P(4, m) for m = 0..8: {}", p4.join(" "));
    Ok(())
}
