//! A self-citation whose context makes it stronger in the higher-order
//! network: chains through P2 into P0 almost always continue to P1.

use citerank::hon::{
    build_transition_matrix, count_subchains, detect_higher_order, rewire, FirstOrderGraph, HigherOrderGraph, LogBase,
    MinSupport, StochasticMatrix,
};
use citerank::rank::{impact_scores, prepare_initial_state, self_citation_weight_report, WalkOperator, WalkView};

fn scores(g: &StochasticMatrix, hon: &HigherOrderGraph) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    Ok(impact_scores(&WalkOperator::new(g)?, &prepare_initial_state(g)?, 64, &hon.base_map())?.node_scores)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names = ["P0", "P1", "P2", "Q1", "Q2", "Q3", "R1", "R2", "R3", "R4", "R5"];
    let mut edges = vec![(2, 0, 1.0), (3, 0, 1.0), (4, 0, 1.0), (5, 0, 1.0), (0, 1, 1.0)];
    edges.extend((6..=10).map(|r| (0, r, 1.0)));
    let graph = FirstOrderGraph::from_edges(names.iter().map(|s| s.to_string()).collect(), edges);

    let mut chains = vec![vec![2, 0, 1]; 100];
    for q in 3..=5 {
        for r in 6..=10 {
            chains.extend(std::iter::repeat_n(vec![q, 0, r], 7));
        }
    }
    let counts = count_subchains(&chains, 2);
    let hon = rewire(&graph, &counts, &detect_higher_order(&counts, 2, MinSupport::At(50), LogBase::Natural))?;
    let fo = HigherOrderGraph::first_order_only(&graph);
    let (g_fo, g_ho) = (build_transition_matrix(&fo, 0.85)?, build_transition_matrix(&hon, 0.85)?);
    let (s_fo, s_ho) = (scores(&g_fo, &fo)?, scores(&g_ho, &hon)?);

    let rows = self_citation_weight_report(
        WalkView { graph: &fo, matrix: &g_fo, node_scores: &s_fo },
        WalkView { graph: &hon, matrix: &g_ho, node_scores: &s_ho },
        &[(0, 1)],
    );
    for r in rows {
        println!("{} -> {}", r.source, r.target);
        println!("  first-order  weight {:.4}  flow {:.3e}", r.first_order_weight, r.first_order_flow);
        println!("  {:<12} weight {:.4}  flow {:.3e}", r.higher_order_node, r.higher_order_weight, r.higher_order_flow);
    }
    Ok(())
}
