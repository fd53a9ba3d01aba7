use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ConditionalCounts, FirstOrderGraph, HigherOrderNode, HonError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HonEdge {
    pub source: usize,
    pub target: usize,
    /// Transition probability before geographic weighting; sums to 1 per source.
    pub probability: f64,
    /// Geographic weight of the underlying first-order edge.
    pub weight: f64,
}

/// Nodes `0..base_count` are the first-order papers; later nodes are
/// conditioned copies, each identified by its path (oldest step first).
/// Edges are sorted by source, then target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderGraph {
    pub labels: Vec<String>,
    pub paths: Vec<Vec<usize>>,
    pub edges: Vec<HonEdge>,
}

impl HigherOrderGraph {
    /// The first-order graph with structural probabilities and its weights.
    pub fn first_order_only(graph: &FirstOrderGraph) -> Self {
        rewire(graph, &ConditionalCounts::new(1), &[]).expect("identity rewiring cannot orphan")
    }

    pub fn node_count(&self) -> usize {
        self.paths.len()
    }

    pub fn base_count(&self) -> usize {
        self.labels.len()
    }

    pub fn higher_order_count(&self) -> usize {
        self.paths.len() - self.labels.len()
    }

    pub fn base_of(&self, node: usize) -> usize {
        *self.paths[node].last().expect("nonempty path")
    }

    /// Base paper of every node, for score aggregation.
    pub fn base_map(&self) -> Vec<usize> {
        (0..self.node_count()).map(|i| self.base_of(i)).collect()
    }

    /// `"b"` for first-order nodes, `"b|a,x"` for `b` reached via `x → a`.
    pub fn label(&self, node: usize) -> String {
        let path = &self.paths[node];
        let mut s = self.labels[*path.last().expect("nonempty path")].clone();
        if path.len() > 1 {
            s.push('|');
            let ctx: Vec<&str> = path[..path.len() - 1].iter().rev().map(|&i| self.labels[i].as_str()).collect();
            s.push_str(&ctx.join(","));
        }
        s
    }

    pub fn out_edges(&self, node: usize) -> &[HonEdge] {
        let lo = self.edges.partition_point(|e| e.source < node);
        let hi = self.edges.partition_point(|e| e.source <= node);
        &self.edges[lo..hi]
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count()];
        for e in &self.edges {
            d[e.target] += 1;
        }
        d
    }

    pub fn node_index(&self) -> HashMap<&[usize], usize> {
        self.paths.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect()
    }

    /// CSV `source,target,probability,weight` using node labels.
    pub fn write_edges_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source", "target", "probability", "weight"])?;
        for e in &self.edges {
            w.write_record([
                self.label(e.source),
                self.label(e.target),
                e.probability.to_string(),
                e.weight.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), HonError> {
        serde_json::to_writer(out, self).map_err(|e| HonError::Format(e.to_string()))
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self, HonError> {
        let g: Self = serde_json::from_reader(input).map_err(|e| HonError::Format(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), HonError> {
        let bad = |m: String| Err(HonError::Format(m));
        let n = self.node_count();
        if self.labels.len() > n {
            return bad("more labels than nodes".into());
        }
        for (i, p) in self.paths.iter().enumerate() {
            if p.is_empty() || p.iter().any(|&b| b >= self.labels.len()) {
                return bad(format!("node {i} has an invalid path"));
            }
            if i < self.labels.len() && p != &vec![i] {
                return bad(format!("first-order node {i} must have path [{i}]"));
            }
        }
        let mut sums = vec![0.0; n];
        for (k, e) in self.edges.iter().enumerate() {
            if e.source >= n || e.target >= n {
                return bad(format!("edge {k} endpoint out of range"));
            }
            if k > 0 && (self.edges[k - 1].source, self.edges[k - 1].target) >= (e.source, e.target) {
                return bad(format!("edge {k} out of order or duplicated"));
            }
            if !(e.probability > 0.0 && e.probability <= 1.0 && e.weight > 0.0 && e.weight.is_finite()) {
                return bad(format!("edge {k} has invalid probability or weight"));
            }
            sums[e.source] += e.probability;
        }
        for (i, s) in sums.iter().enumerate() {
            if *s != 0.0 && (s - 1.0).abs() > 1e-9 {
                return bad(format!("out-probabilities of node {i} sum to {s}"));
            }
        }
        let indeg = self.in_degrees();
        if let Some(i) = (self.labels.len()..n).find(|&i| indeg[i] == 0) {
            return Err(HonError::Orphan(self.label(i)));
        }
        Ok(())
    }
}

/// Replaces papers by their conditioned copies where a context was detected.
///
/// Every detected path and all of its prefixes become nodes, so a walk can
/// always reach a conditioned copy through its own context. First-order
/// nodes keep the structural distribution `1/outdeg` over their citation
/// edges; conditioned nodes use the empirical successor distribution of
/// their path. Each edge targets the node for the longest suffix of
/// `source path + target` that exists.
pub fn rewire(
    graph: &FirstOrderGraph,
    counts: &ConditionalCounts,
    nodes: &[HigherOrderNode],
) -> Result<HigherOrderGraph, HonError> {
    let n = graph.node_count();
    let mut extra: BTreeSet<Vec<usize>> = BTreeSet::new();
    for node in nodes {
        for len in 2..=node.path.len() {
            extra.insert(node.path[..len].to_vec());
        }
    }
    let mut paths: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut ho: Vec<Vec<usize>> = extra.into_iter().collect();
    ho.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    paths.extend(ho);
    let index: HashMap<Vec<usize>, usize> = paths.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let max_len = paths.iter().map(Vec::len).max().unwrap_or(1);

    let label_of = |p: &[usize]| {
        let base = graph.labels[*p.last().expect("nonempty")].clone();
        let ctx: Vec<&str> = p[..p.len() - 1].iter().rev().map(|&i| graph.labels[i].as_str()).collect();
        format!("{base}|{}", ctx.join(","))
    };

    let resolve = |path: &[usize], next: usize| -> usize {
        let mut full = path.to_vec();
        full.push(next);
        let longest = full.len().min(max_len);
        for len in (1..=longest).rev() {
            if let Some(&i) = index.get(&full[full.len() - len..]) {
                return i;
            }
        }
        unreachable!("first-order node always exists")
    };

    let mut edges = Vec::new();
    for (src, path) in paths.iter().enumerate() {
        let base = *path.last().expect("nonempty");
        let dist: Vec<(usize, f64, f64)> = if path.len() == 1 {
            let out = &graph.out[base];
            let p = 1.0 / out.len() as f64;
            out.iter().map(|&(t, w)| (t, p, w)).collect()
        } else {
            let succ = counts.successors(path).ok_or_else(|| HonError::ZeroSupport(path.clone()))?;
            let support: u64 = succ.values().sum();
            succ.iter()
                .map(|(&t, &c)| {
                    let w = graph.weight(base, t).ok_or_else(|| HonError::MissingEdge(label_of(path)))?;
                    Ok((t, c as f64 / support as f64, w))
                })
                .collect::<Result<_, HonError>>()?
        };
        let mut out: Vec<HonEdge> = dist
            .into_iter()
            .map(|(t, probability, weight)| HonEdge { source: src, target: resolve(path, t), probability, weight })
            .collect();
        out.sort_by_key(|e| e.target);
        edges.extend(out);
    }

    let hog = HigherOrderGraph { labels: graph.labels.clone(), paths, edges };
    let indeg = hog.in_degrees();
    if let Some(i) = (n..hog.node_count()).find(|&i| indeg[i] == 0) {
        return Err(HonError::Orphan(hog.label(i)));
    }
    Ok(hog)
}
