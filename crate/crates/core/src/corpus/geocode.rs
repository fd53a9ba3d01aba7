//! Institution coordinates: a CSV-backed cache plus pluggable geocoders.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Corpus, CorpusError};
use crate::geo::GeoPoint;

/// Environment variable holding the geocoding API key.
pub const GEOCODER_KEY_ENV: &str = "CITERANK_GEOCODER_KEY";
/// Optional override of the geocoding endpoint.
pub const GEOCODER_URL_ENV: &str = "CITERANK_GEOCODER_URL";

const DEFAULT_GEOCODER_URL: &str = "https://maps.googleapis.com/maps/api/geocode/json";

#[derive(Debug, Error)]
pub enum GeocodeError {
    #[error("geocoder API key missing: set {GEOCODER_KEY_ENV}")]
    MissingKey,
    #[error("geocoder request failed: {0}")]
    Transport(String),
    #[error("geocoder response not understood: {0}")]
    Response(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeocodeHit {
    pub location: GeoPoint,
    pub country: Option<String>,
}

pub trait Geocoder: Send + Sync {
    fn geocode(&self, query: &str) -> Result<Option<GeocodeHit>, GeocodeError>;

    /// Offline geocoders are never called.
    fn is_offline(&self) -> bool {
        false
    }
}

/// The default: resolves nothing, makes no calls.
#[derive(Debug, Default, Clone, Copy)]
pub struct OfflineGeocoder;

impl Geocoder for OfflineGeocoder {
    fn geocode(&self, _query: &str) -> Result<Option<GeocodeHit>, GeocodeError> {
        Ok(None)
    }

    fn is_offline(&self) -> bool {
        true
    }
}

/// Answers from a fixed table and counts how often it was asked.
#[derive(Debug, Default)]
pub struct StaticGeocoder {
    answers: HashMap<String, GeocodeHit>,
    calls: AtomicUsize,
}

impl StaticGeocoder {
    pub fn new(answers: impl IntoIterator<Item = (String, GeocodeHit)>) -> Self {
        Self { answers: answers.into_iter().collect(), calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Geocoder for StaticGeocoder {
    fn geocode(&self, query: &str) -> Result<Option<GeocodeHit>, GeocodeError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.answers.get(query).cloned())
    }
}

/// HTTP GET geocoder speaking the Google Geocoding response format.
pub struct HttpGeocoder {
    endpoint: String,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpGeocoder {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(Duration::from_secs(15))).build().into();
        Self { endpoint: endpoint.into(), api_key: api_key.into(), agent }
    }

    pub fn from_env() -> Result<Self, GeocodeError> {
        let key = std::env::var(GEOCODER_KEY_ENV).map_err(|_| GeocodeError::MissingKey)?;
        let url = std::env::var(GEOCODER_URL_ENV).unwrap_or_else(|_| DEFAULT_GEOCODER_URL.to_string());
        Ok(Self::new(url, key))
    }
}

/// Extracts the first result of a Google-style geocoding response.
pub(crate) fn parse_geocode_response(body: &serde_json::Value) -> Result<Option<GeocodeHit>, GeocodeError> {
    match body.get("status").and_then(|s| s.as_str()) {
        Some("OK") => {}
        Some("ZERO_RESULTS") => return Ok(None),
        Some(other) => return Err(GeocodeError::Response(format!("status {other}"))),
        None => return Err(GeocodeError::Response("missing status".into())),
    }
    let Some(first) = body.pointer("/results/0") else { return Ok(None) };
    let lat = first.pointer("/geometry/location/lat").and_then(|v| v.as_f64());
    let lng = first.pointer("/geometry/location/lng").and_then(|v| v.as_f64());
    let (Some(lat), Some(lng)) = (lat, lng) else {
        return Err(GeocodeError::Response("result without geometry".into()));
    };
    let location = GeoPoint::new(lat, lng).map_err(|e| GeocodeError::Response(e.to_string()))?;
    let country = first
        .get("address_components")
        .and_then(|c| c.as_array())
        .into_iter()
        .flatten()
        .find(|c| c.get("types").and_then(|t| t.as_array()).is_some_and(|t| t.iter().any(|t| t == "country")))
        .and_then(|c| c.get("short_name"))
        .and_then(|s| s.as_str())
        .map(str::to_string);
    Ok(Some(GeocodeHit { location, country }))
}

impl Geocoder for HttpGeocoder {
    fn geocode(&self, query: &str) -> Result<Option<GeocodeHit>, GeocodeError> {
        let mut resp = self
            .agent
            .get(&self.endpoint)
            .query("address", query)
            .query("key", &self.api_key)
            .call()
            .map_err(|e| GeocodeError::Transport(e.to_string()))?;
        let body: serde_json::Value = resp.body_mut().read_json().map_err(|e| GeocodeError::Response(e.to_string()))?;
        parse_geocode_response(&body)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub name: String,
    pub location: Option<GeoPoint>,
    pub country: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheRow {
    institution_id: String,
    name: String,
    latitude: Option<f64>,
    longitude: Option<f64>,
    country: Option<String>,
}

/// Institution coordinate store with header
/// `institution_id,name,latitude,longitude,country`.
///
/// Reads may run concurrently; writes are serialised by the lock. Persisting
/// writes a temporary file next to the target and renames it into place.
#[derive(Debug, Default)]
pub struct CoordinateCache {
    path: Option<PathBuf>,
    entries: RwLock<BTreeMap<String, CacheEntry>>,
}

impl CoordinateCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path`, treating a missing file as an empty cache.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let entries = match File::open(path) {
            Ok(f) => Self::read_entries(BufReader::new(f), &path.display().to_string())?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(CorpusError::io(path.display().to_string(), e)),
        };
        Ok(Self { path: Some(path.to_path_buf()), entries: RwLock::new(entries) })
    }

    pub fn from_reader<R: Read>(input: R) -> Result<Self, CorpusError> {
        Ok(Self { path: None, entries: RwLock::new(Self::read_entries(input, "<reader>")?) })
    }

    fn read_entries<R: Read>(input: R, label: &str) -> Result<BTreeMap<String, CacheEntry>, CorpusError> {
        let mut out = BTreeMap::new();
        let mut rdr = csv::Reader::from_reader(input);
        for row in rdr.deserialize::<CacheRow>() {
            let row = row.map_err(|e| CorpusError::Cache { path: label.to_string(), message: e.to_string() })?;
            let location =
                match (row.latitude, row.longitude) {
                    (Some(lat), Some(lon)) => Some(GeoPoint::new(lat, lon).map_err(|source| {
                        CorpusError::Coordinates { institution: row.institution_id.clone(), source }
                    })?),
                    (None, None) => None,
                    _ => {
                        return Err(CorpusError::Cache {
                            path: label.to_string(),
                            message: format!(
                                "{}: latitude and longitude must both be set or both empty",
                                row.institution_id
                            ),
                        })
                    }
                };
            let country = row.country.filter(|c| !c.is_empty());
            out.insert(row.institution_id, CacheEntry { name: row.name, location, country });
        }
        Ok(out)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, id: &str) -> Option<CacheEntry> {
        self.entries.read().expect("cache lock").get(id).cloned()
    }

    pub fn insert(&self, id: &str, entry: CacheEntry) {
        self.entries.write().expect("cache lock").insert(id.to_string(), entry);
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for (id, e) in self.entries.read().expect("cache lock").iter() {
            w.serialize(CacheRow {
                institution_id: id.clone(),
                name: e.name.clone(),
                latitude: e.location.map(|p| p.lat()),
                longitude: e.location.map(|p| p.lon()),
                country: e.country.clone(),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    /// Atomically rewrites the backing file; a no-op for in-memory caches.
    pub fn persist(&self) -> Result<(), CorpusError> {
        let Some(path) = &self.path else { return Ok(()) };
        let fail = |source| CorpusError::CacheWrite { path: path.display().to_string(), source };
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
        self.write_csv(&mut tmp).map_err(|e| fail(std::io::Error::other(e)))?;
        tmp.as_file().sync_all().map_err(fail)?;
        tmp.persist(path).map_err(|e| fail(e.error))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolveReport {
    pub institutions: usize,
    pub already_resolved: usize,
    pub from_cache: usize,
    pub geocoded: usize,
    pub unresolved: usize,
    pub geocoder_calls: usize,
    pub geocoder_failures: usize,
}

impl ResolveReport {
    pub fn resolution_rate(&self) -> f64 {
        if self.institutions == 0 {
            0.0
        } else {
            (self.institutions - self.unresolved) as f64 / self.institutions as f64
        }
    }
}

/// Fills institution locations from the cache first and the geocoder second.
///
/// Locations already present are left untouched. Geocoder failures leave the
/// institution unresolved; new resolutions are added to the cache and the
/// cache is persisted, and a failed write is fatal.
pub fn resolve_coordinates(
    corpus: &mut Corpus,
    geocoder: &dyn Geocoder,
    cache: &CoordinateCache,
) -> Result<ResolveReport, CorpusError> {
    let mut report = ResolveReport { institutions: corpus.institutions.len(), ..Default::default() };
    for inst in &mut corpus.institutions {
        if inst.location.is_some() {
            report.already_resolved += 1;
            continue;
        }
        if let Some(entry) = cache.get(&inst.institution_id) {
            if !entry.name.is_empty() {
                inst.name = entry.name.clone();
            }
            if inst.country.is_none() {
                inst.country = entry.country.clone();
            }
            if let Some(loc) = entry.location {
                inst.location = Some(loc);
                report.from_cache += 1;
                continue;
            }
        }
        if geocoder.is_offline() {
            report.unresolved += 1;
            continue;
        }
        report.geocoder_calls += 1;
        match geocoder.geocode(&inst.name) {
            Ok(Some(hit)) => {
                inst.location = Some(hit.location);
                if inst.country.is_none() {
                    inst.country = hit.country.clone();
                }
                cache.insert(
                    &inst.institution_id,
                    CacheEntry { name: inst.name.clone(), location: Some(hit.location), country: inst.country.clone() },
                );
                report.geocoded += 1;
            }
            Ok(None) => report.unresolved += 1,
            Err(e) => {
                log::warn!("geocoding {:?} failed: {e}", inst.name);
                report.geocoder_failures += 1;
                report.unresolved += 1;
            }
        }
    }
    if report.geocoded > 0 {
        cache.persist()?;
    }
    Ok(report)
}
