use std::fmt::Write as _;
use std::path::Path;

use super::artifacts::read_json;
use super::stages::{FitOutcome, GeoReport, HonReport, IngestReport, RankReport, TieSummary};
use super::{read_rankings, ArtifactLayout, PipelineError};
use crate::hon::MinSupport;

/// Rows in the top table when the run's configuration is unavailable.
const DEFAULT_TOP: usize = 10;

fn top_rows(layout: &ArtifactLayout) -> usize {
    std::fs::read_to_string(layout.config())
        .ok()
        .and_then(|t| super::PipelineConfig::from_toml_str(&t).ok())
        .map_or(DEFAULT_TOP, |c| c.rank.top)
}

fn ties_line(out: &mut String, name: &str, t: &TieSummary) {
    let _ = writeln!(
        out,
        "ties {name}: {} groups covering {} papers, {} groups differentiated",
        t.groups, t.tied_papers, t.differentiated
    );
}

/// Plain-text summary of a finished artifact directory.
///
/// Fails with a missing-artifact error naming the first stage whose outputs
/// are absent.
pub fn report(dir: &Path) -> Result<String, PipelineError> {
    let layout = ArtifactLayout::new(dir);
    let ingest: IngestReport = read_json(&layout.require("ingest", "ingest_report.json")?)?;
    let geo: GeoReport = read_json(&layout.require("geo", "geo_report.json")?)?;
    let hon: HonReport = read_json(&layout.require("hon", "hon_report.json")?)?;
    let rank: RankReport = read_json(&layout.require("rank", "rank_report.json")?)?;
    let mut rows = read_rankings(&layout.require("rank", "rankings.csv")?)?;

    let mut out = String::new();
    let _ = writeln!(out, "== ingest ==");
    let _ = writeln!(out, "source: {}", ingest.source);
    let _ = writeln!(
        out,
        "papers: {}  citations: {}  self-citations: {}",
        ingest.papers, ingest.citations, ingest.self_citations
    );
    let _ = writeln!(
        out,
        "institutions: {} ({} resolved, {:.1}%)",
        ingest.institutions,
        ingest.resolved_institutions,
        100.0 * ingest.resolve.resolution_rate()
    );
    let _ = writeln!(
        out,
        "skipped records: {} malformed, {} dangling references",
        ingest.parse.malformed_lines, ingest.parse.dangling_references
    );
    match ingest.d_max_km {
        Some(d) => {
            let _ = writeln!(out, "max institution distance: {d:.1} km");
        }
        None => {
            let _ = writeln!(out, "max institution distance: n/a");
        }
    }

    let _ = writeln!(out, "\n== geo ==");
    let _ = writeln!(out, "geolocated citations: {} of {}", geo.resolved_citations, geo.citations);
    for (filter, total) in &geo.binned {
        let _ = write!(out, "{filter}: {total} binned, ");
        match geo.fits.get(filter) {
            Some(FitOutcome::Fit(f)) => {
                let _ = writeln!(
                    out,
                    "fit y0={:.4} A1={:.4} t1={:.1} km{}",
                    f.y0,
                    f.a1,
                    f.t1_km,
                    if f.converged { "" } else { " (not converged)" }
                );
            }
            Some(FitOutcome::Skipped { error }) => {
                let _ = writeln!(out, "no fit ({error})");
            }
            None => {
                let _ = writeln!(out, "not fitted");
            }
        }
    }
    match &geo.clusters {
        Some(c) => {
            let _ = writeln!(
                out,
                "clusters: {} (eps {} km, min_pts {}), largest {}, noise {}",
                c.clusters, c.eps_km, c.min_pts, c.largest, c.noise
            );
        }
        None => {
            let _ = writeln!(out, "clusters: not computed");
        }
    }

    let _ = writeln!(out, "\n== hon ==");
    let support = match hon.min_support {
        MinSupport::At(s) => s.to_string(),
        MinSupport::Infinite => "inf".into(),
    };
    let _ = writeln!(out, "order: {}  min_support: {support}", hon.order);
    let _ = writeln!(
        out,
        "chains: {}  contexts: {}  detected: {}",
        hon.summary.chains, hon.summary.contexts, hon.summary.detected
    );
    let _ = writeln!(
        out,
        "nodes: {} base + {} higher-order, edges: {}",
        hon.base_nodes, hon.higher_order_nodes, hon.summary.edges
    );

    let _ = writeln!(out, "\n== rank ==");
    let _ = writeln!(out, "alpha: {}  steps: {}  papers: {}", rank.alpha, rank.steps, rank.papers);
    for (name, w) in [
        ("quantum", &rank.quantum),
        ("weighted quantum", &rank.weighted_quantum),
        ("higher-order quantum", &rank.hon_weighted_quantum),
    ] {
        let _ = writeln!(
            out,
            "{name}: total {:.6}, convergence gap {:.2e}{}, renormalizations {}",
            w.total,
            w.convergence_gap,
            if w.converged { "" } else { " (not converged)" },
            w.renormalizations
        );
    }
    ties_line(&mut out, "classical vs quantum", &rank.ties_classical_vs_quantum);
    ties_line(&mut out, "classical vs higher-order", &rank.ties_classical_vs_hon);
    let _ = writeln!(out, "self-citations reported: {}", rank.self_citations);

    rows.sort_by(|a, b| {
        b.hon_weighted_quantum_pr.total_cmp(&a.hon_weighted_quantum_pr).then_with(|| a.paper_id.cmp(&b.paper_id))
    });
    let top = top_rows(&layout);
    let _ = writeln!(
        out,
        "\n{:>4}  {:<12} {:>12} {:>9} {:>9} {:>9}",
        "rank", "paper_id", "score", "citations", "classical", "quantum"
    );
    for (i, r) in rows.iter().take(top).enumerate() {
        let _ = writeln!(
            out,
            "{:>4}  {:<12} {:>12.6e} {:>9} {:>9} {:>9}",
            i + 1,
            r.paper_id,
            r.hon_weighted_quantum_pr,
            r.citations,
            r.rank_classical,
            r.rank_quantum
        );
    }
    Ok(out)
}
