use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::artifacts::{write_file, write_json};
use super::{ArtifactLayout, GeoConfig, IngestConfig, PipelineError, RankConfig};
use crate::corpus::{
    build_citation_graph_with, parse_corpus, resolve_coordinates, synth_corpus, AffiliationStrategy, CacheEntry,
    CitationGraph, CoordinateCache, GraphOptions, HttpGeocoder, OfflineGeocoder, ParseStats, ResolveReport,
    SynthConfig,
};
use crate::geo::{
    bin_citations_by_cluster_distance, bin_citations_by_distance, dbscan_cluster, fit_exp_decay, BinFilter,
    ClusterLabel, ExpDecayFit, GreatCircle,
};
use crate::hon::{
    build_higher_order, build_transition_matrix, FirstOrderGraph, HigherOrderGraph, HonConfig, HonSummary, MinSupport,
    StochasticMatrix,
};
use crate::rank::{
    classical_pagerank, compare_rankings, impact_scores, prepare_initial_state, rank_positions,
    self_citation_weight_report, ImpactScores, TieReport, WalkOperator, WalkView,
};

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> PipelineError + '_ {
    move |e| PipelineError::Data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub source: String,
    pub papers: usize,
    pub institutions: usize,
    pub resolved_institutions: usize,
    pub citations: usize,
    pub self_citations: usize,
    pub weighted_citations: usize,
    pub d_max_km: Option<f64>,
    pub strategy: AffiliationStrategy,
    pub parse: ParseStats,
    pub resolve: ResolveReport,
}

/// Parses (or generates) the corpus, resolves coordinates and builds the
/// citation graph. Writes `ingest/`.
pub fn ingest_stage(
    cfg: &IngestConfig,
    seed: u64,
    layout: &ArtifactLayout,
) -> Result<(CitationGraph, IngestReport), PipelineError> {
    let (mut corpus, source) = match &cfg.papers {
        Some(path) => {
            let f = File::open(path).map_err(|e| PipelineError::io(path, e))?;
            (parse_corpus(BufReader::new(f))?, path.display().to_string())
        }
        None => (synth_corpus(&SynthConfig { seed, ..cfg.synth.clone() })?, "synthetic".to_string()),
    };
    let cache = match &cfg.coords {
        Some(path) => CoordinateCache::load(path)?,
        None => CoordinateCache::in_memory(),
    };
    let resolve = if cfg.geocode {
        let geocoder = HttpGeocoder::from_env().map_err(crate::corpus::CorpusError::from)?;
        resolve_coordinates(&mut corpus, &geocoder, &cache)?
    } else {
        resolve_coordinates(&mut corpus, &OfflineGeocoder, &cache)?
    };
    let opts = GraphOptions { strategy: cfg.strategy, weight_floor: cfg.weight_floor };
    let graph = build_citation_graph_with(&corpus, opts, &GreatCircle::default())?;

    let papers_path = layout.file("ingest", "papers.jsonl");
    write_file(&papers_path, |w| corpus.write_jsonl(w).map_err(|e| PipelineError::io(&papers_path, e)))?;
    let inst_path = layout.file("ingest", "institutions.csv");
    let table = CoordinateCache::in_memory();
    for inst in &corpus.institutions {
        table.insert(
            &inst.institution_id,
            CacheEntry { name: inst.name.clone(), location: inst.location, country: inst.country.clone() },
        );
    }
    write_file(&inst_path, |w| table.write_csv(w).map_err(csv_err(&inst_path)))?;
    let graph_path = layout.file("ingest", "graph.json");
    write_file(&graph_path, |w| Ok(graph.write_json(w)?))?;

    let report = IngestReport {
        source,
        papers: corpus.papers.len(),
        institutions: corpus.institutions.len(),
        resolved_institutions: corpus.resolved_institutions(),
        citations: graph.edges.len(),
        self_citations: graph.edges.iter().filter(|e| e.self_citation).count(),
        weighted_citations: graph.edges.iter().filter(|e| e.geo_resolved).count(),
        d_max_km: graph.d_max_km,
        strategy: cfg.strategy,
        parse: corpus.stats.clone(),
        resolve,
    };
    write_json(&layout.file("ingest", "ingest_report.json"), &report)?;
    Ok((graph, report))
}

/// A fit or the reason none was possible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FitOutcome {
    Fit(ExpDecayFit),
    Skipped { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub eps_km: f64,
    pub min_pts: usize,
    pub clusters: usize,
    pub noise: usize,
    pub largest: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoReport {
    pub citations: usize,
    pub resolved_citations: usize,
    pub bin_width_km: f64,
    pub binned: BTreeMap<String, u64>,
    pub fits: BTreeMap<String, FitOutcome>,
    pub clusters: Option<ClusterSummary>,
}

/// Distance series per filter, optional decay fits and optional DBSCAN
/// grouping of institutions. Writes `geo/`.
pub fn geo_stage(
    graph: &CitationGraph,
    cfg: &GeoConfig,
    filters: &[BinFilter],
    cluster: bool,
    layout: &ArtifactLayout,
) -> Result<GeoReport, PipelineError> {
    let mut binned = BTreeMap::new();
    let mut fits = BTreeMap::new();
    for &filter in filters {
        let series = bin_citations_by_distance(graph, cfg.bin_width_km, filter)?;
        let path = layout.file("geo", &format!("bins_{filter}.csv"));
        write_file(&path, |w| series.write_csv(w).map_err(csv_err(&path)))?;
        binned.insert(filter.to_string(), series.total());
        if cfg.fit {
            let outcome = match fit_exp_decay(&series) {
                Ok(fit) => FitOutcome::Fit(fit),
                Err(e) => FitOutcome::Skipped { error: e.to_string() },
            };
            write_json(&layout.file("geo", &format!("fit_{filter}.json")), &outcome)?;
            fits.insert(filter.to_string(), outcome);
        }
    }

    let clusters = if cluster {
        let points: Vec<_> =
            graph.institutions.iter().filter_map(|i| i.location.map(|p| (i.institution_id.clone(), p))).collect();
        let assignment = dbscan_cluster(&points, cfg.dbscan_eps_km, cfg.dbscan_min_pts)?;
        let path = layout.file("geo", "clusters.csv");
        write_file(&path, |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["institution_id", "latitude", "longitude", "cluster"]).map_err(csv_err(&path))?;
            for ((id, p), label) in assignment.points.iter().zip(&assignment.labels) {
                let label = match label {
                    ClusterLabel::Cluster(c) => c.to_string(),
                    ClusterLabel::Noise => "noise".into(),
                };
                out.write_record([id.clone(), p.lat().to_string(), p.lon().to_string(), label])
                    .map_err(csv_err(&path))?;
            }
            out.flush().map_err(|e| PipelineError::io(&path, e))
        })?;
        let series = bin_citations_by_cluster_distance(graph, &assignment, cfg.bin_width_km, BinFilter::All)?;
        let path = layout.file("geo", "bins_clustered_all.csv");
        write_file(&path, |w| series.write_csv(w).map_err(csv_err(&path)))?;
        Some(ClusterSummary {
            eps_km: cfg.dbscan_eps_km,
            min_pts: cfg.dbscan_min_pts,
            clusters: assignment.n_clusters,
            noise: assignment.noise_count(),
            largest: assignment.cluster_sizes().into_iter().max().unwrap_or(0),
        })
    } else {
        None
    };

    let report = GeoReport {
        citations: graph.edges.len(),
        resolved_citations: graph.resolved_edge_count(),
        bin_width_km: cfg.bin_width_km,
        binned,
        fits,
        clusters,
    };
    write_json(&layout.file("geo", "geo_report.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HonReport {
    pub order: usize,
    pub min_support: MinSupport,
    pub base_nodes: usize,
    pub higher_order_nodes: usize,
    pub summary: HonSummary,
    pub top_k: Option<usize>,
}

/// Builds the higher-order graph, optionally on the top-k subgraph. Writes `hon/`.
pub fn hon_stage(
    graph: &CitationGraph,
    cfg: &HonConfig,
    seed: u64,
    layout: &ArtifactLayout,
) -> Result<(HigherOrderGraph, HonReport), PipelineError> {
    let sub;
    let graph = match cfg.top_k {
        Some(k) => {
            sub = graph.top_k_by_citations(k);
            &sub
        }
        None => graph,
    };
    let (hog, summary) = build_higher_order(graph, cfg, seed)?;
    let path = layout.file("hon", "hon_graph.json");
    write_file(&path, |w| Ok(hog.write_json(w)?))?;
    let path = layout.file("hon", "hon_edges.csv");
    write_file(&path, |w| hog.write_edges_csv(w).map_err(csv_err(&path)))?;
    let report = HonReport {
        order: cfg.order,
        min_support: cfg.min_support,
        base_nodes: hog.base_count(),
        higher_order_nodes: hog.higher_order_count(),
        summary,
        top_k: cfg.top_k,
    };
    write_json(&layout.file("hon", "hon_report.json"), &report)?;
    Ok((hog, report))
}

/// One row of `rank/rankings.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub paper_id: String,
    pub citations: usize,
    pub classical_pr: f64,
    pub quantum_pr: f64,
    pub weighted_quantum_pr: f64,
    pub hon_weighted_quantum_pr: f64,
    pub rank_classical: usize,
    pub rank_quantum: usize,
    pub rank_hon: usize,
    /// Classical rank minus quantum rank; positive means the paper moved up.
    pub delta_quantum: i64,
    pub delta_hon: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieSummary {
    pub groups: usize,
    pub tied_papers: usize,
    pub differentiated: usize,
}

impl From<&TieReport> for TieSummary {
    fn from(r: &TieReport) -> Self {
        Self { groups: r.groups.len(), tied_papers: r.tied_entries(), differentiated: r.differentiated() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSummary {
    pub nodes: usize,
    pub total: f64,
    pub renormalizations: usize,
    pub convergence_gap: f64,
    pub converged: bool,
}

impl WalkSummary {
    fn of(s: &ImpactScores) -> Self {
        Self {
            nodes: s.node_scores.len(),
            total: s.scores.iter().sum(),
            renormalizations: s.renormalizations,
            convergence_gap: s.convergence_gap,
            converged: s.converged(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub alpha: f64,
    pub steps: usize,
    pub papers: usize,
    pub classical_total: f64,
    pub quantum: WalkSummary,
    pub weighted_quantum: WalkSummary,
    pub hon_weighted_quantum: WalkSummary,
    pub ties_classical_vs_quantum: TieSummary,
    pub ties_classical_vs_hon: TieSummary,
    pub self_citations: usize,
}

/// First-order projection of a higher-order graph with the given weighting.
fn first_order_of(hog: &HigherOrderGraph, uniform: bool) -> FirstOrderGraph {
    let edges = (0..hog.base_count()).flat_map(|i| {
        hog.out_edges(i).iter().map(move |e| (i, hog.base_of(e.target), if uniform { 1.0 } else { e.weight }))
    });
    FirstOrderGraph::from_edges(hog.labels.clone(), edges.collect::<Vec<_>>())
}

fn quantum(g: &StochasticMatrix, base_map: &[usize], cfg: &RankConfig) -> Result<ImpactScores, PipelineError> {
    let u = WalkOperator::with_cap(g, cfg.max_nodes)?;
    let psi0 = prepare_initial_state(g)?;
    Ok(impact_scores(&u, &psi0, cfg.steps, base_map)?)
}

/// Classical, quantum, geographically weighted quantum and higher-order
/// weighted quantum PageRank for the papers of `hog`. Writes `rank/`.
///
/// `citations` supplies self-citation flags; without it the self-citation
/// report is empty.
pub fn rank_stage(
    hog: &HigherOrderGraph,
    citations: Option<&CitationGraph>,
    cfg: &RankConfig,
    layout: &ArtifactLayout,
) -> Result<RankReport, PipelineError> {
    let n = hog.base_count();
    let identity: Vec<usize> = (0..n).collect();

    let uniform = HigherOrderGraph::first_order_only(&first_order_of(hog, true));
    let weighted = HigherOrderGraph::first_order_only(&first_order_of(hog, false));
    let g_uniform = build_transition_matrix(&uniform, cfg.alpha)?;
    let g_weighted = build_transition_matrix(&weighted, cfg.alpha)?;
    let g_hon = build_transition_matrix(hog, cfg.alpha)?;

    let classical = classical_pagerank(&g_uniform, cfg.tol, cfg.max_iter)?;
    let q_plain = quantum(&g_uniform, &identity, cfg)?;
    let q_weighted = quantum(&g_weighted, &identity, cfg)?;
    let q_hon = quantum(&g_hon, &hog.base_map(), cfg)?;

    let in_degree = uniform.in_degrees();
    let (rc, rq, rh) = (rank_positions(&classical), rank_positions(&q_plain.scores), rank_positions(&q_hon.scores));
    let rows: Vec<RankingRow> = (0..n)
        .map(|i| RankingRow {
            paper_id: hog.labels[i].clone(),
            citations: in_degree[i],
            classical_pr: classical[i],
            quantum_pr: q_plain.scores[i],
            weighted_quantum_pr: q_weighted.scores[i],
            hon_weighted_quantum_pr: q_hon.scores[i],
            rank_classical: rc[i],
            rank_quantum: rq[i],
            rank_hon: rh[i],
            delta_quantum: rc[i] as i64 - rq[i] as i64,
            delta_hon: rc[i] as i64 - rh[i] as i64,
        })
        .collect();
    let path = layout.file("rank", "rankings.csv");
    write_file(&path, |w| {
        let mut out = csv::Writer::from_writer(w);
        for r in &rows {
            out.serialize(r).map_err(csv_err(&path))?;
        }
        out.flush().map_err(|e| PipelineError::io(&path, e))
    })?;

    if cfg.emit_series {
        let labels: Vec<String> = (0..hog.node_count()).map(|i| hog.label(i)).collect();
        let path = layout.file("rank", "series.csv");
        write_file(&path, |w| q_hon.series.write_csv(w, &labels).map_err(csv_err(&path)))?;
    }

    let ties_q = compare_rankings(&classical, &q_plain.scores, cfg.tie_tol)?;
    let ties_h = compare_rankings(&classical, &q_hon.scores, cfg.tie_tol)?;
    write_json(&layout.file("rank", "ties_classical_vs_quantum.json"), &ties_q)?;
    write_json(&layout.file("rank", "ties_classical_vs_hon.json"), &ties_h)?;

    let index: HashMap<&str, usize> = hog.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let self_edges: Vec<(usize, usize)> = citations
        .map(|g| {
            g.edges
                .iter()
                .filter(|e| e.self_citation)
                .filter_map(|e| {
                    Some((*index.get(g.nodes[e.source].as_str())?, *index.get(g.nodes[e.target].as_str())?))
                })
                .collect()
        })
        .unwrap_or_default();
    let report_rows = self_citation_weight_report(
        WalkView { graph: &weighted, matrix: &g_weighted, node_scores: &q_weighted.node_scores },
        WalkView { graph: hog, matrix: &g_hon, node_scores: &q_hon.node_scores },
        &self_edges,
    );
    let path = layout.file("rank", "self_citations.csv");
    write_file(&path, |w| {
        let mut out = csv::Writer::from_writer(w);
        if report_rows.is_empty() {
            out.write_record([
                "source",
                "target",
                "first_order_weight",
                "first_order_flow",
                "higher_order_node",
                "higher_order_weight",
                "higher_order_flow",
            ])
            .map_err(csv_err(&path))?;
        }
        for r in &report_rows {
            out.serialize(r).map_err(csv_err(&path))?;
        }
        out.flush().map_err(|e| PipelineError::io(&path, e))
    })?;

    let report = RankReport {
        alpha: cfg.alpha,
        steps: cfg.steps,
        papers: n,
        classical_total: classical.iter().sum(),
        quantum: WalkSummary::of(&q_plain),
        weighted_quantum: WalkSummary::of(&q_weighted),
        hon_weighted_quantum: WalkSummary::of(&q_hon),
        ties_classical_vs_quantum: (&ties_q).into(),
        ties_classical_vs_hon: (&ties_h).into(),
        self_citations: report_rows.len(),
    };
    write_json(&layout.file("rank", "rank_report.json"), &report)?;
    Ok(report)
}

pub fn read_rankings(path: &Path) -> Result<Vec<RankingRow>, PipelineError> {
    let f = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    csv::Reader::from_reader(BufReader::new(f)).deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

fn read_scores(path: &Path, column: Option<&str>) -> Result<Vec<(String, f64)>, PipelineError> {
    let f = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(BufReader::new(f));
    let headers = rdr.headers().map_err(csv_err(path))?.clone();
    let col = match column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PipelineError::Data(format!("{}: no column {name:?}", path.display())))?,
        None => headers.iter().position(|h| h == "score").unwrap_or(1),
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        let id = rec.get(0).unwrap_or_default().to_string();
        let v: f64 = rec
            .get(col)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PipelineError::Data(format!("{}: row {id:?} has no numeric score", path.display())))?;
        out.push((id, v));
    }
    Ok(out)
}

/// Tie report of two score files keyed by their first column. The score
/// column defaults to `score`, else the second column.
pub fn compare_score_files(
    a: &Path,
    column_a: Option<&str>,
    b: &Path,
    column_b: Option<&str>,
    tie_tol: f64,
) -> Result<(Vec<String>, TieReport), PipelineError> {
    let sa = read_scores(a, column_a)?;
    let sb: HashMap<String, f64> = read_scores(b, column_b)?.into_iter().collect();
    if sa.len() != sb.len() {
        return Err(PipelineError::Data(format!("score files cover different papers ({} vs {})", sa.len(), sb.len())));
    }
    let mut ids = Vec::with_capacity(sa.len());
    let (mut va, mut vb) = (Vec::new(), Vec::new());
    for (id, x) in sa {
        let y = *sb.get(&id).ok_or_else(|| PipelineError::Data(format!("{id} missing from {}", b.display())))?;
        ids.push(id);
        va.push(x);
        vb.push(y);
    }
    Ok((ids, compare_rankings(&va, &vb, tie_tol)?))
}
