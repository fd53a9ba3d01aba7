//! Bins citations of a synthetic corpus by institution distance and fits
//! `y0 + A1·exp(-x/t1)` to each series.
//!
//! The generator draws counts per bin over all institution pairs, so only the
//! `all` series follows its model; the intra- and inter-country series cover
//! part of the distance range each and fit poorly.
//!
//! Run with an output directory to keep the CSV series:
//! `cargo run --example distance_bins_and_fit -- out/`

use std::path::PathBuf;

use citerank::corpus::{build_citation_graph, synth_corpus, AffiliationStrategy, GeographicModel, SynthConfig};
use citerank::geo::{bin_citations_by_distance, fit_exp_decay, BinFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = GeographicModel { intensity: 10.0, ..Default::default() };
    let cfg = SynthConfig { n_papers: 5000, model, seed: 7, ..Default::default() };
    let graph = build_citation_graph(&synth_corpus(&cfg)?, AffiliationStrategy::FirstAuthor);
    println!(
        "{} citations; generator: y0={} A1={} t1={} km (x{} intensity)",
        graph.edges.len(),
        model.y0,
        model.a1,
        model.t1_km,
        model.intensity
    );

    let out = std::env::args().nth(1).map(PathBuf::from);
    for filter in BinFilter::ALL {
        let series = bin_citations_by_distance(&graph, 100.0, filter)?;
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            series.write_csv(std::fs::File::create(dir.join(format!("bins_{filter}.csv")))?)?;
        }
        match fit_exp_decay(&series) {
            Ok(f) => println!(
                "{filter:<6} {:>6} citations  y0={:.3} A1={:.3} t1={:.0} km  converged={}",
                series.total(),
                f.y0,
                f.a1,
                f.t1_km,
                f.converged
            ),
            Err(e) => println!("{filter:<6} {:>6} citations  no fit: {e}", series.total()),
        }
    }
    Ok(())
}
