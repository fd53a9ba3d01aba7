use std::collections::HashMap;
use std::io::{BufRead, Read};

use serde::Deserialize;

use super::{Author, Corpus, CorpusError, PaperRecord};

/// Reads the line-delimited papers file.
///
/// Lines that fail to parse, or carry an empty id, are skipped and counted in
/// `stats.malformed_lines`. Blank lines are ignored. A read error on the
/// underlying stream is fatal.
pub fn parse_corpus<R: BufRead>(input: R) -> Result<Corpus, CorpusError> {
    let mut records = Vec::new();
    let mut lines = 0;
    let mut malformed = 0;
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(format!("papers line {}", n + 1), e))?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        match serde_json::from_str::<PaperRecord>(&line) {
            Ok(rec) if !rec.paper_id.trim().is_empty() => records.push(rec),
            Ok(_) => {
                log::debug!("line {}: empty paper id", n + 1);
                malformed += 1;
            }
            Err(e) => {
                log::debug!("line {}: {e}", n + 1);
                malformed += 1;
            }
        }
    }
    if malformed > 0 {
        log::warn!("skipped {malformed} malformed paper records");
    }
    let mut corpus = Corpus::from_records(records);
    corpus.stats.lines = lines;
    corpus.stats.malformed_lines = malformed;
    Ok(corpus)
}

#[derive(Deserialize)]
struct ApsTitle {
    value: String,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ApsAuthor {
    name: String,
    #[serde(default)]
    affiliation_ids: Vec<String>,
}

#[derive(Deserialize)]
struct ApsAffiliation {
    id: String,
    name: String,
}

#[derive(Deserialize)]
struct ApsMetadata {
    id: String,
    date: chrono::NaiveDate,
    title: ApsTitle,
    #[serde(default)]
    authors: Vec<ApsAuthor>,
    #[serde(default)]
    affiliations: Vec<ApsAffiliation>,
}

/// Minimal adapter for APS-style exports: one metadata JSON object per line
/// plus a `citing_doi,cited_doi` CSV. Affiliation names become institution
/// keys. Undecodable metadata lines are skipped; the result still goes
/// through the usual cleaning in [`Corpus::from_records`].
pub fn records_from_aps<M: BufRead, C: Read>(metadata: M, citations: C) -> Result<Vec<PaperRecord>, CorpusError> {
    let mut cites: HashMap<String, Vec<String>> = HashMap::new();
    let mut rdr = csv::Reader::from_reader(citations);
    for row in rdr.records() {
        let row = row.map_err(|e| CorpusError::GraphFormat(format!("APS citations: {e}")))?;
        if let (Some(a), Some(b)) = (row.get(0), row.get(1)) {
            cites.entry(a.to_string()).or_default().push(b.to_string());
        }
    }
    let mut out = Vec::new();
    for line in metadata.lines() {
        let line = line.map_err(|e| CorpusError::io("APS metadata", e))?;
        let Ok(meta) = serde_json::from_str::<ApsMetadata>(&line) else { continue };
        let names: HashMap<&str, &str> = meta.affiliations.iter().map(|a| (a.id.as_str(), a.name.as_str())).collect();
        let authors = meta
            .authors
            .iter()
            .map(|a| Author {
                name: a.name.clone(),
                affiliation: a
                    .affiliation_ids
                    .first()
                    .and_then(|id| names.get(id.as_str()))
                    .map(|s| s.to_string())
                    .unwrap_or_default(),
            })
            .collect();
        out.push(PaperRecord {
            cited_paper_ids: cites.remove(&meta.id).unwrap_or_default(),
            paper_id: meta.id,
            title: meta.title.value,
            authors,
            publication_date: meta.date,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const THREE: &str = r#"{"id":"p1","title":"One","authors":[{"name":"A. Smith","affiliation":"MSU"}],"date":"1999-01-02","citations":["p2","p3"]}
{"id":"p2","title":"Two","authors":[{"name":"B. Jones","affiliation":"LANL"}],"date":"1998-05-06","citations":[]}
{"id":"p3","title":"Three","authors":[{"name":"C. Wu","affiliation":"ANL"}],"date":"1997-07-08","citations":[]}
"#;

    #[test]
    fn three_records_two_edges() {
        let c = parse_corpus(THREE.as_bytes()).unwrap();
        assert_eq!(c.papers.len(), 3);
        assert_eq!(c.edge_count(), 2);
        assert_eq!(c.institutions.len(), 3);
        assert!(c.stats.reconciles());
    }

    #[test]
    fn dangling_reference_is_dropped_and_counted() {
        let text = THREE.replace(r#"["p2","p3"]"#, r#"["p2","p3","missing"]"#);
        let c = parse_corpus(text.as_bytes()).unwrap();
        assert_eq!(c.stats.dangling_references, 1);
        assert_eq!(c.edge_count(), 2);
    }

    #[test]
    fn malformed_lines_are_skipped() {
        let text = format!("{THREE}not json\n{{\"id\":\"p9\"}}\n\n{{\"id\":\"\",\"title\":\"x\",\"authors\":[],\"date\":\"2000-01-01\",\"citations\":[]}}\n");
        let c = parse_corpus(text.as_bytes()).unwrap();
        assert_eq!(c.stats.malformed_lines, 3);
        assert_eq!(c.stats.lines, 6);
        assert_eq!(c.papers.len(), 3);
    }

    #[test]
    fn self_citation_is_dropped() {
        let text = THREE.replace(r#"["p2","p3"]"#, r#"["p1","p2","p2","p3"]"#);
        let c = parse_corpus(text.as_bytes()).unwrap();
        assert_eq!(c.stats.self_loops, 1);
        assert_eq!(c.stats.duplicate_citations, 1);
        assert_eq!(c.papers[0].cited_paper_ids, vec!["p2", "p3"]);
    }

    struct Broken;
    impl Read for Broken {
        fn read(&mut self, _: &mut [u8]) -> std::io::Result<usize> {
            Err(std::io::Error::other("disk on fire"))
        }
    }

    #[test]
    fn unreadable_stream_is_fatal() {
        let err = parse_corpus(std::io::BufReader::new(Broken)).unwrap_err();
        assert!(matches!(err, CorpusError::Io { .. }));
    }

    #[test]
    fn aps_adapter_maps_affiliations_and_citations() {
        let meta = r#"{"id":"10.1/a","date":"1990-01-01","title":{"value":"A"},"authors":[{"name":"X","affiliationIds":["a1"]}],"affiliations":[{"id":"a1","name":"Argonne National Laboratory"}]}
{"id":"10.1/b","date":"1989-01-01","title":{"value":"B"},"authors":[{"name":"Y"}]}
garbage
"#;
        let cites = "citing_doi,cited_doi\n10.1/a,10.1/b\n";
        let recs = records_from_aps(meta.as_bytes(), cites.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].authors[0].affiliation, "Argonne National Laboratory");
        assert_eq!(recs[0].cited_paper_ids, vec!["10.1/b"]);
        assert_eq!(recs[1].authors[0].affiliation, "");
    }

    fn arb_lines() -> impl Strategy<Value = String> {
        let ids = prop::sample::select(vec!["a", "b", "c", "d", "e"]);
        let rec = (ids.clone(), prop::collection::vec(ids, 0..6), any::<bool>()).prop_map(|(id, cites, broken)| {
            if broken {
                "{broken".to_string()
            } else {
                let cs: Vec<String> = cites.iter().map(|c| format!("\"{c}\"")).collect();
                format!(
                    r#"{{"id":"{id}","title":"t","authors":[{{"name":"N","affiliation":"I{id}"}}],"date":"2000-01-01","citations":[{}]}}"#,
                    cs.join(",")
                )
            }
        });
        prop::collection::vec(rec, 0..12).prop_map(|v| v.join("\n"))
    }

    proptest! {
        #[test]
        fn parse_is_idempotent(text in arb_lines()) {
            let once = parse_corpus(text.as_bytes()).unwrap();
            prop_assert!(once.stats.reconciles());
            let mut buf = Vec::new();
            once.write_jsonl(&mut buf).unwrap();
            let twice = parse_corpus(buf.as_slice()).unwrap();
            prop_assert_eq!(&once.papers, &twice.papers);
            prop_assert_eq!(&once.institutions, &twice.institutions);
        }
    }
}
