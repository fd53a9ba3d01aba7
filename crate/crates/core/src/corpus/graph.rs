use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, Institution, PaperRecord};
use crate::geo::{
    max_pairwise_distance, relative_weight, DistanceProvider, GeoPoint, GreatCircle, DEFAULT_WEIGHT_FLOOR,
};

/// Which institutions represent a multi-author citation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AffiliationStrategy {
    /// First listed author of each paper.
    #[default]
    #[serde(alias = "first")]
    FirstAuthor,
    /// Mean weight over every resolved citing × cited affiliation pair.
    AllPairs,
}

impl fmt::Display for AffiliationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AffiliationStrategy::FirstAuthor => "first",
            AffiliationStrategy::AllPairs => "all-pairs",
        })
    }
}

impl FromStr for AffiliationStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" | "first-author" => Ok(AffiliationStrategy::FirstAuthor),
            "all-pairs" => Ok(AffiliationStrategy::AllPairs),
            other => Err(format!("unknown affiliation strategy {other:?} (expected first or all-pairs)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphOptions {
    pub strategy: AffiliationStrategy,
    pub weight_floor: f64,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self { strategy: AffiliationStrategy::FirstAuthor, weight_floor: DEFAULT_WEIGHT_FLOOR }
    }
}

/// A citing → cited edge between paper indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationEdge {
    pub source: usize,
    pub target: usize,
    pub citing_institution: Option<usize>,
    pub cited_institution: Option<usize>,
    /// Distance between the two institutions; `None` unless both are resolved.
    pub distance_km: Option<f64>,
    /// In `(0, 1]`; exactly 1 on edges that could not be weighted.
    pub geographic_weight: f64,
    pub self_citation: bool,
    /// False when the weight is the neutral default.
    pub geo_resolved: bool,
}

/// Paper-level citation graph with institution annotations.
///
/// Edges are sorted by `(source, target)` and unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationGraph {
    pub nodes: Vec<String>,
    pub institutions: Vec<Institution>,
    pub edges: Vec<CitationEdge>,
    pub d_max_km: Option<f64>,
}

/// Case-folded name with internal whitespace collapsed to single spaces.
pub fn normalize_author(name: &str) -> String {
    name.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

fn shares_author(a: &PaperRecord, b: &PaperRecord) -> bool {
    let names: HashSet<String> =
        a.authors.iter().map(|x| normalize_author(&x.name)).filter(|n| !n.is_empty()).collect();
    b.authors.iter().any(|x| names.contains(&normalize_author(&x.name)))
}

/// First-author attribution with the default weight floor and great-circle distances.
pub fn build_citation_graph(corpus: &Corpus, strategy: AffiliationStrategy) -> CitationGraph {
    build_citation_graph_with(corpus, GraphOptions { strategy, ..Default::default() }, &GreatCircle::default())
        .expect("default weight floor is valid")
}

pub fn build_citation_graph_with(
    corpus: &Corpus,
    opts: GraphOptions,
    provider: &dyn DistanceProvider,
) -> Result<CitationGraph, CorpusError> {
    let weight_err = |source| CorpusError::Coordinates { institution: "<weight floor>".into(), source };
    relative_weight(0.0, 1.0, opts.weight_floor).map_err(weight_err)?;

    let resolved: Vec<GeoPoint> = corpus.institutions.iter().filter_map(|i| i.location).collect();
    let d_max = match max_pairwise_distance(&resolved, provider) {
        Ok(d) if d > 0.0 => Some(d),
        Ok(_) => {
            log::warn!("all resolved institutions share one location; geographic weights disabled");
            None
        }
        Err(_) => None,
    };

    let inst_index = corpus.institution_index();
    let paper_index = corpus.paper_index();
    let inst_of = |aff: &str| if aff.is_empty() { None } else { inst_index.get(aff).copied() };
    let location = |i: Option<usize>| i.and_then(|i| corpus.institutions[i].location);

    let pair_weight = |a: GeoPoint, b: GeoPoint| -> (f64, f64) {
        let d = provider.distance_km(&a, &b);
        let dm = d_max.expect("checked by caller");
        let w = relative_weight(d.min(dm), dm, opts.weight_floor).expect("validated floor and range");
        (d, w)
    };

    let mut edges = Vec::with_capacity(corpus.edge_count());
    for (s, paper) in corpus.papers.iter().enumerate() {
        let citing_inst = paper.first_affiliation().and_then(inst_of);
        let mut targets: Vec<usize> =
            paper.cited_paper_ids.iter().filter_map(|id| paper_index.get(id.as_str()).copied()).collect();
        targets.sort_unstable();
        targets.dedup();
        for t in targets {
            let cited = &corpus.papers[t];
            let cited_inst = cited.first_affiliation().and_then(inst_of);
            let first_pair = match (location(citing_inst), location(cited_inst), d_max) {
                (Some(a), Some(b), Some(_)) => Some(pair_weight(a, b)),
                _ => None,
            };
            let (distance_km, weight) = match opts.strategy {
                AffiliationStrategy::FirstAuthor => (first_pair.map(|p| p.0), first_pair.map(|p| p.1)),
                AffiliationStrategy::AllPairs if d_max.is_some() => {
                    let locs = |p: &PaperRecord| -> Vec<GeoPoint> {
                        p.authors.iter().filter_map(|a| location(inst_of(&a.affiliation))).collect()
                    };
                    let (la, lb) = (locs(paper), locs(cited));
                    let ws: Vec<f64> = la.iter().flat_map(|a| lb.iter().map(|b| pair_weight(*a, *b).1)).collect();
                    let mean = (!ws.is_empty()).then(|| ws.iter().sum::<f64>() / ws.len() as f64);
                    (first_pair.map(|p| p.0), mean)
                }
                AffiliationStrategy::AllPairs => (None, None),
            };
            edges.push(CitationEdge {
                source: s,
                target: t,
                citing_institution: citing_inst,
                cited_institution: cited_inst,
                distance_km,
                geographic_weight: weight.unwrap_or(1.0),
                self_citation: shares_author(paper, cited),
                geo_resolved: weight.is_some(),
            });
        }
    }
    let unweighted = edges.iter().filter(|e| !e.geo_resolved).count();
    if unweighted > 0 {
        log::info!("{unweighted} of {} edges carry the neutral weight (unresolved institutions)", edges.len());
    }

    Ok(CitationGraph {
        nodes: corpus.papers.iter().map(|p| p.paper_id.clone()).collect(),
        institutions: corpus.institutions.clone(),
        edges,
        d_max_km: d_max,
    })
}

impl CitationGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges leaving node `i`.
    pub fn out_edges(&self, i: usize) -> &[CitationEdge] {
        let lo = self.edges.partition_point(|e| e.source < i);
        let hi = self.edges.partition_point(|e| e.source <= i);
        &self.edges[lo..hi]
    }

    /// In-degree of every node.
    pub fn citation_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.nodes.len()];
        for e in &self.edges {
            c[e.target] += 1;
        }
        c
    }

    pub fn resolved_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.distance_km.is_some()).count()
    }

    /// Checks the structural invariants, used after deserialisation.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: String| Err(CorpusError::GraphFormat(m));
        let n = self.nodes.len();
        let mut ids = HashSet::new();
        if let Some(dup) = self.nodes.iter().find(|id| !ids.insert(id.as_str())) {
            return bad(format!("duplicate node {dup}"));
        }
        for inst in &self.institutions {
            if let Some(p) = inst.location {
                GeoPoint::new(p.lat(), p.lon())
                    .map_err(|source| CorpusError::Coordinates { institution: inst.institution_id.clone(), source })?;
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.source >= n || e.target >= n {
                return bad(format!("edge {k} endpoint out of range"));
            }
            if e.source == e.target {
                return bad(format!("edge {k} is a self-loop"));
            }
            if k > 0 && (self.edges[k - 1].source, self.edges[k - 1].target) >= (e.source, e.target) {
                return bad(format!("edge {k} out of order or duplicated"));
            }
            if !(e.geographic_weight > 0.0 && e.geographic_weight <= 1.0) {
                return bad(format!("edge {k} weight {} outside (0, 1]", e.geographic_weight));
            }
            for i in [e.citing_institution, e.cited_institution].into_iter().flatten() {
                if i >= self.institutions.len() {
                    return bad(format!("edge {k} institution out of range"));
                }
            }
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), CorpusError> {
        serde_json::to_writer(out, self).map_err(|e| CorpusError::GraphFormat(e.to_string()))
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self, CorpusError> {
        let g: Self = serde_json::from_reader(input).map_err(|e| CorpusError::GraphFormat(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    /// Induced subgraph on the `k` most-cited nodes (ties by node order),
    /// keeping the original relative node order.
    pub fn top_k_by_citations(&self, k: usize) -> CitationGraph {
        if k >= self.nodes.len() {
            return self.clone();
        }
        let counts = self.citation_counts();
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        let mut keep: Vec<usize> = order[..k].to_vec();
        keep.sort_unstable();
        let mut remap = vec![usize::MAX; self.nodes.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| remap[e.source] != usize::MAX && remap[e.target] != usize::MAX)
            .map(|e| CitationEdge { source: remap[e.source], target: remap[e.target], ..e.clone() })
            .collect();
        CitationGraph {
            nodes: keep.iter().map(|&i| self.nodes[i].clone()).collect(),
            institutions: self.institutions.clone(),
            edges,
            d_max_km: self.d_max_km,
        }
    }
}
