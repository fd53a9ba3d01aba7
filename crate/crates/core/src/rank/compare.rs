use serde::{Deserialize, Serialize};

use super::RankError;
use crate::hon::{HigherOrderGraph, StochasticMatrix};

/// 1-based rank of every entry, highest score first, ties broken by index.
pub fn rank_positions(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut rank = vec![0; scores.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    rank
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieGroup {
    pub members: Vec<usize>,
    /// Smallest A-score in the group.
    pub score_a: f64,
    /// `max − min` of the B-scores of the members.
    pub spread_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieReport {
    pub tie_tol: f64,
    /// Groups of two or more entries whose consecutive A-scores differ by less than `tie_tol`.
    pub groups: Vec<TieGroup>,
    /// `(index, a, b)` sorted by descending A, for paired plots.
    pub paired: Vec<(usize, f64, f64)>,
}

impl TieReport {
    /// Groups that B separates by more than the tie tolerance.
    pub fn differentiated(&self) -> usize {
        self.groups.iter().filter(|g| g.spread_b > self.tie_tol).count()
    }

    pub fn tied_entries(&self) -> usize {
        self.groups.iter().map(|g| g.members.len()).sum()
    }
}

pub fn compare_rankings(a: &[f64], b: &[f64], tie_tol: f64) -> Result<TieReport, RankError> {
    if a.len() != b.len() {
        return Err(RankError::Length(a.len(), b.len()));
    }
    if !(tie_tol >= 0.0) {
        return Err(RankError::Tolerance(tie_tol));
    }
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&x, &y| a[x].total_cmp(&a[y]).then(x.cmp(&y)));

    let mut groups = Vec::new();
    let mut start = 0;
    for end in 1..=order.len() {
        let breaks = end == order.len() || (a[order[end]] - a[order[end - 1]]).abs() >= tie_tol;
        if breaks {
            if end - start >= 2 {
                let mut members = order[start..end].to_vec();
                members.sort_unstable();
                let (lo, hi) = members
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(b[i]), hi.max(b[i])));
                groups.push(TieGroup { score_a: a[order[start]], members, spread_b: hi - lo });
            }
            start = end;
        }
    }
    groups.sort_by(|x, y| y.score_a.total_cmp(&x.score_a));

    let mut paired: Vec<(usize, f64, f64)> = (0..a.len()).map(|i| (i, a[i], b[i])).collect();
    paired.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    Ok(TieReport { tie_tol, groups, paired })
}

/// A ranked walk: its graph, matrix and per-node scores.
#[derive(Debug, Clone, Copy)]
pub struct WalkView<'a> {
    pub graph: &'a HigherOrderGraph,
    pub matrix: &'a StochasticMatrix,
    pub node_scores: &'a [f64],
}

impl WalkView<'_> {
    /// Node for `base` in its longest recorded context, or the first-order node.
    fn deepest_variant(&self, base: usize) -> usize {
        (self.graph.base_count()..self.graph.node_count())
            .filter(|&v| self.graph.base_of(v) == base)
            .max_by(|&x, &y| self.graph.paths[x].len().cmp(&self.graph.paths[y].len()).then(y.cmp(&x)))
            .unwrap_or(base)
    }

    /// Matrix entry from `node` towards base paper `target`.
    fn entry_to_base(&self, node: usize, target: usize) -> f64 {
        let t = self
            .graph
            .out_edges(node)
            .iter()
            .find(|e| self.graph.base_of(e.target) == target)
            .map_or(target, |e| e.target);
        self.matrix.get(t, node)
    }
}

/// Effective weight of one self-citation in the two networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfCitationWeight {
    pub source: String,
    pub target: String,
    /// `G[target][source]` in the first-order network.
    pub first_order_weight: f64,
    /// First-order weight times the source's score.
    pub first_order_flow: f64,
    /// Node used on the higher-order side, e.g. `P0|P2`.
    pub higher_order_node: String,
    pub higher_order_weight: f64,
    pub higher_order_flow: f64,
}

/// For each self-citation `(source, target)` in base indices, the
/// transition weight in the first-order network against the weight leaving
/// the source's deepest conditioned copy in the higher-order network.
pub fn self_citation_weight_report(
    first_order: WalkView<'_>,
    higher_order: WalkView<'_>,
    self_citations: &[(usize, usize)],
) -> Vec<SelfCitationWeight> {
    self_citations
        .iter()
        .map(|&(s, t)| {
            let fo = first_order.entry_to_base(s, t);
            let v = higher_order.deepest_variant(s);
            let ho = higher_order.entry_to_base(v, t);
            SelfCitationWeight {
                source: first_order.graph.label(s),
                target: first_order.graph.label(t),
                first_order_weight: fo,
                first_order_flow: fo * first_order.node_scores[s],
                higher_order_node: higher_order.graph.label(v),
                higher_order_weight: ho,
                higher_order_flow: ho * higher_order.node_scores[v],
            }
        })
        .collect()
}
