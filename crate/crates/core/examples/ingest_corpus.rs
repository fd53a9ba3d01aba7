//! Parses a small papers file, resolves affiliations through a cache and a
//! canned geocoder, and builds the geographically weighted citation graph.

use std::io::Cursor;

use citerank::corpus::{
    build_citation_graph, parse_corpus, resolve_coordinates, AffiliationStrategy, CoordinateCache, GeocodeHit,
    StaticGeocoder,
};
use citerank::geo::GeoPoint;

const PAPERS: &str = r#"{"id":"A1","title":"Shell model","authors":[{"name":"R. Feynman","affiliation":"Los Alamos"}],"date":"1975-03-01","citations":[]}
{"id":"B1","title":"Fission rates","authors":[{"name":"M. Mayer","affiliation":"Argonne"}],"date":"1976-05-10","citations":["A1"]}
{"id":"C1","title":"Heavy ions","authors":[{"name":"R. Feynman","affiliation":"Los Alamos"},{"name":"L. Meitner","affiliation":"Darmstadt"}],"date":"1977-01-20","citations":["A1","B1","B1","Z9"]}
not a record
{"id":"D1","title":"Cluster decay","authors":[{"name":"G. Flerov","affiliation":"Dubna"}],"date":"1978-08-02","citations":["C1","D1"]}
"#;

const CACHE: &str = "institution_id,name,latitude,longitude,country\nArgonne,Argonne,41.5945343,-88.0411993,US\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut corpus = parse_corpus(Cursor::new(PAPERS))?;
    let s = &corpus.stats;
    println!(
        "{} papers; {} raw citations -> {} edges ({} self-loops, {} duplicates, {} dangling, {} malformed lines)",
        corpus.papers.len(),
        s.raw_citations,
        s.edges,
        s.self_loops,
        s.duplicate_citations,
        s.dangling_references,
        s.malformed_lines
    );

    let cache = CoordinateCache::from_reader(CACHE.as_bytes())?;
    let geocoder = StaticGeocoder::new([
        (
            "Los Alamos".to_string(),
            GeocodeHit { location: GeoPoint::new(35.8800364, -106.3031138)?, country: Some("US".into()) },
        ),
        (
            "Dubna".to_string(),
            GeocodeHit { location: GeoPoint::new(56.7417029, 37.1911003)?, country: Some("RU".into()) },
        ),
    ]);
    let resolved = resolve_coordinates(&mut corpus, &geocoder, &cache)?;
    println!(
        "institutions: {} from cache, {} geocoded, {} unresolved ({} geocoder calls)",
        resolved.from_cache, resolved.geocoded, resolved.unresolved, resolved.geocoder_calls
    );

    let graph = build_citation_graph(&corpus, AffiliationStrategy::FirstAuthor);
    for e in &graph.edges {
        let km = e.distance_km.map_or("n/a".to_string(), |d| format!("{d:.0} km"));
        println!(
            "{} -> {}  {:>9}  weight {:.4}{}",
            graph.nodes[e.source],
            graph.nodes[e.target],
            km,
            e.geographic_weight,
            if e.self_citation { "  self-citation" } else { "" }
        );
    }
    Ok(())
}
