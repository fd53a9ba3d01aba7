use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::CitationGraph;

/// Paper indices in citation direction.
pub type CitationChain = Vec<usize>;

/// Edge weights used by the walk and the transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    #[default]
    Geographic,
    Uniform,
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "geographic" => Ok(Weighting::Geographic),
            "uniform" => Ok(Weighting::Uniform),
            other => Err(format!("unknown weighting {other:?} (expected geographic or uniform)")),
        }
    }
}

/// Weighted adjacency lists; `out[i]` is sorted by target and every weight is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderGraph {
    pub labels: Vec<String>,
    pub out: Vec<Vec<(usize, f64)>>,
}

impl FirstOrderGraph {
    /// Builds from `(source, target, weight)` triples. Duplicate pairs keep the last weight.
    pub fn from_edges(labels: Vec<String>, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut out = vec![Vec::new(); labels.len()];
        for (s, t, w) in edges {
            assert!(s < labels.len() && t < labels.len(), "edge ({s}, {t}) outside {} nodes", labels.len());
            assert!(w > 0.0 && w.is_finite(), "edge weight must be positive, got {w}");
            out[s].push((t, w));
        }
        for list in &mut out {
            list.sort_by_key(|&(t, _)| t);
            let mut dedup: Vec<(usize, f64)> = Vec::with_capacity(list.len());
            for &(t, w) in list.iter() {
                match dedup.last_mut() {
                    Some(last) if last.0 == t => last.1 = w,
                    _ => dedup.push((t, w)),
                }
            }
            *list = dedup;
        }
        Self { labels, out }
    }

    /// Unit weights, nodes labelled by index.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Self {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges.iter().map(|&(s, t)| (s, t, 1.0)))
    }

    pub fn from_citation_graph(graph: &CitationGraph, weighting: Weighting) -> Self {
        Self::from_edges(
            graph.nodes.clone(),
            graph.edges.iter().map(|e| {
                let w = match weighting {
                    Weighting::Geographic => e.geographic_weight,
                    Weighting::Uniform => 1.0,
                };
                (e.source, e.target, w)
            }),
        )
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn weight(&self, s: usize, t: usize) -> Option<f64> {
        let list = &self.out[s];
        list.binary_search_by_key(&t, |&(x, _)| x).ok().map(|k| list[k].1)
    }
}

fn walk(graph: &FirstOrderGraph, start: usize, max_len: usize, rng: &mut ChaCha8Rng) -> CitationChain {
    let mut chain = vec![start];
    let mut at = start;
    while chain.len() < max_len {
        let out = &graph.out[at];
        if out.is_empty() {
            break;
        }
        let total: f64 = out.iter().map(|&(_, w)| w).sum();
        let mut u = rng.random::<f64>() * total;
        let mut next = out[out.len() - 1].0;
        for &(t, w) in out {
            if u < w {
                next = t;
                break;
            }
            u -= w;
        }
        chain.push(next);
        at = next;
    }
    chain
}

/// `walks_per_node` weighted walks from every node, each at most `max_len`
/// nodes long and stopping early at dangling nodes.
///
/// Walks from node `i` draw from stream `i` of a generator seeded with
/// `seed`, so the output does not depend on thread scheduling. Chains are
/// returned grouped by start node in node order.
pub fn sample_citation_chains(
    graph: &FirstOrderGraph,
    walks_per_node: usize,
    max_len: usize,
    seed: u64,
) -> Vec<CitationChain> {
    let max_len = max_len.max(1);
    (0..graph.node_count())
        .into_par_iter()
        .flat_map_iter(|start| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(start as u64);
            (0..walks_per_node).map(move |_| walk(graph, start, max_len, &mut rng)).collect::<Vec<_>>()
        })
        .collect()
}
