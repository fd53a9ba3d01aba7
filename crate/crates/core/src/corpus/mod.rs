//! Paper records, institutions and the institution-annotated citation graph.

mod geocode;
mod graph;
mod parse;
mod synth;

use std::collections::HashMap;
use std::io::{self, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geocode::{
    resolve_coordinates, CacheEntry, CoordinateCache, GeocodeError, GeocodeHit, Geocoder, HttpGeocoder,
    OfflineGeocoder, ResolveReport, StaticGeocoder, GEOCODER_KEY_ENV, GEOCODER_URL_ENV,
};
pub use graph::{
    build_citation_graph, build_citation_graph_with, normalize_author, AffiliationStrategy, CitationEdge,
    CitationGraph, GraphOptions,
};
pub use parse::{parse_corpus, records_from_aps};
pub use synth::{synth_corpus, GeographicModel, SynthConfig};

use crate::geo::{GeoError, GeoPoint};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error on {context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
    #[error("coordinate cache {path}: {message}")]
    Cache { path: String, message: String },
    #[error("coordinate cache write failed for {path}: {source}")]
    CacheWrite {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("invalid coordinates for {institution}: {source}")]
    Coordinates {
        institution: String,
        #[source]
        source: GeoError,
    },
    #[error("graph file: {0}")]
    GraphFormat(String),
    #[error("synthetic corpus: {0}")]
    Synth(String),
    #[error(transparent)]
    Geocode(#[from] GeocodeError),
}

impl CorpusError {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        CorpusError::Io { context: context.into(), source }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Author {
    pub name: String,
    /// Institution key; empty when the affiliation is unknown.
    pub affiliation: String,
}

/// One line of the papers file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    #[serde(rename = "id")]
    pub paper_id: String,
    pub title: String,
    pub authors: Vec<Author>,
    #[serde(rename = "date")]
    pub publication_date: NaiveDate,
    #[serde(rename = "citations")]
    pub cited_paper_ids: Vec<String>,
}

impl PaperRecord {
    pub fn first_affiliation(&self) -> Option<&str> {
        self.authors.first().map(|a| a.affiliation.as_str()).filter(|a| !a.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Institution {
    pub institution_id: String,
    pub name: String,
    pub location: Option<GeoPoint>,
    pub country: Option<String>,
}

impl Institution {
    pub fn unresolved(id: &str) -> Self {
        Self { institution_id: id.to_string(), name: id.to_string(), location: None, country: None }
    }
}

/// Cleaning counters. `edges = raw_citations - self_loops - duplicate_citations - dangling_references`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseStats {
    pub lines: usize,
    pub malformed_lines: usize,
    pub duplicate_paper_ids: usize,
    pub raw_citations: usize,
    pub self_loops: usize,
    pub duplicate_citations: usize,
    pub dangling_references: usize,
    pub edges: usize,
}

impl ParseStats {
    pub fn reconciles(&self) -> bool {
        self.raw_citations.checked_sub(self.self_loops + self.duplicate_citations + self.dangling_references)
            == Some(self.edges)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub papers: Vec<PaperRecord>,
    pub institutions: Vec<Institution>,
    pub stats: ParseStats,
}

impl Corpus {
    /// Cleans raw records: drops self-citations, duplicate and dangling
    /// references, and derives the institution list from affiliations in
    /// order of first appearance.
    pub fn from_records(records: Vec<PaperRecord>) -> Self {
        let mut stats = ParseStats::default();
        let mut seen = std::collections::HashSet::new();
        let mut papers = Vec::with_capacity(records.len());
        for mut rec in records {
            if !seen.insert(rec.paper_id.clone()) {
                stats.duplicate_paper_ids += 1;
                continue;
            }
            stats.raw_citations += rec.cited_paper_ids.len();
            let before = rec.cited_paper_ids.len();
            rec.cited_paper_ids.retain(|c| c != &rec.paper_id);
            stats.self_loops += before - rec.cited_paper_ids.len();
            let mut distinct = std::collections::HashSet::new();
            let before = rec.cited_paper_ids.len();
            rec.cited_paper_ids.retain(|c| distinct.insert(c.clone()));
            stats.duplicate_citations += before - rec.cited_paper_ids.len();
            papers.push(rec);
        }
        for rec in &mut papers {
            let before = rec.cited_paper_ids.len();
            rec.cited_paper_ids.retain(|c| seen.contains(c));
            stats.dangling_references += before - rec.cited_paper_ids.len();
        }
        stats.edges = papers.iter().map(|p| p.cited_paper_ids.len()).sum();
        if stats.self_loops > 0 {
            log::warn!("dropped {} self-referencing citations", stats.self_loops);
        }

        let mut institutions = Vec::new();
        let mut known = std::collections::HashSet::new();
        for a in papers.iter().flat_map(|p| &p.authors) {
            if !a.affiliation.is_empty() && known.insert(a.affiliation.clone()) {
                institutions.push(Institution::unresolved(&a.affiliation));
            }
        }
        Corpus { papers, institutions, stats }
    }

    pub fn edge_count(&self) -> usize {
        self.papers.iter().map(|p| p.cited_paper_ids.len()).sum()
    }

    pub fn paper_index(&self) -> HashMap<&str, usize> {
        self.papers.iter().enumerate().map(|(i, p)| (p.paper_id.as_str(), i)).collect()
    }

    pub fn institution_index(&self) -> HashMap<&str, usize> {
        self.institutions.iter().enumerate().map(|(i, p)| (p.institution_id.as_str(), i)).collect()
    }

    pub fn resolved_institutions(&self) -> usize {
        self.institutions.iter().filter(|i| i.location.is_some()).count()
    }

    /// Papers file, one JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for p in &self.papers {
            serde_json::to_writer(&mut out, p)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}
