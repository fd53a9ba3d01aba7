use super::RankError;
use crate::hon::StochasticMatrix;

/// Power iteration from the uniform vector until the L1 change drops below `tol`.
pub fn classical_pagerank(g: &StochasticMatrix, tol: f64, max_iter: usize) -> Result<Vec<f64>, RankError> {
    if !(tol > 0.0) {
        return Err(RankError::Tolerance(tol));
    }
    let n = g.dim();
    let mut x = vec![1.0 / n as f64; n];
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let mut y = g.apply(&x);
        let s: f64 = y.iter().sum();
        for v in &mut y {
            *v /= s;
        }
        change = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if change < tol {
            return Ok(x);
        }
    }
    Err(RankError::NotConverged { iterations: max_iter, change, last: x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hon::{build_transition_matrix, FirstOrderGraph, HigherOrderGraph};

    fn google(n: usize, edges: &[(usize, usize)], alpha: f64) -> StochasticMatrix {
        build_transition_matrix(&HigherOrderGraph::first_order_only(&FirstOrderGraph::unweighted(n, edges)), alpha)
            .unwrap()
    }

    #[test]
    fn two_cycle_is_even() {
        for alpha in [0.3, 0.85, 1.0] {
            let x = classical_pagerank(&google(2, &[(0, 1), (1, 0)], alpha), 1e-14, 1000).unwrap();
            assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_matches_dense_power_iteration() {
        let g = google(3, &[(0, 1), (1, 2)], 0.85);
        let x = classical_pagerank(&g, 1e-13, 10_000).unwrap();
        // Straightforward re-implementation on a row-major copy.
        let m: Vec<Vec<f64>> = (0..3).map(|k| (0..3).map(|j| g.get(k, j)).collect()).collect();
        let mut y = vec![1.0 / 3.0; 3];
        for _ in 0..2000 {
            y = (0..3).map(|k| (0..3).map(|j| m[k][j] * y[j]).sum()).collect();
        }
        for k in 0..3 {
            assert!((x[k] - y[k]).abs() < 1e-8);
        }
        assert!(x[2] > x[1] && x[1] > x[0]);
    }

    #[test]
    fn complete_graph_is_uniform() {
        let edges: Vec<_> = (0..5).flat_map(|a| (0..5).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        let x = classical_pagerank(&google(5, &edges, 0.85), 1e-14, 100).unwrap();
        assert!(x.iter().all(|v| (v - 0.2).abs() < 1e-12));
    }

    #[test]
    fn reports_last_iterate_on_failure() {
        let g = google(3, &[(0, 1), (1, 2), (2, 0)], 1.0);
        let chain = google(3, &[(0, 1), (1, 2)], 0.85);
        assert!(classical_pagerank(&chain, 1e-15, 1).is_err());
        match classical_pagerank(&g, 1e-12, 5) {
            // The uniform start is already stationary for a 3-cycle.
            Ok(x) => assert!((x[0] - 1.0 / 3.0).abs() < 1e-15),
            Err(e) => panic!("{e}"),
        }
        let Err(RankError::NotConverged { last, .. }) = classical_pagerank(&chain, 1e-15, 1) else { panic!() };
        assert_eq!(last.len(), 3);
        assert!(matches!(classical_pagerank(&g, 0.0, 1), Err(RankError::Tolerance(_))));
    }
}
