//! Seeded generator of corpora whose citation counts decay exponentially with
//! institution distance.
//!
//! For every 100 km bin that contains at least one institution pair, the
//! generator draws `Poisson(intensity · (y0 + A1·exp(-mid/t1)))` citations,
//! each between a random pair of that bin. Binning the result and fitting the
//! decay model therefore recovers `(intensity·y0, intensity·A1, t1)`.

use std::collections::{BTreeMap, HashSet};

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{Author, Corpus, CorpusError, Institution, PaperRecord};
use crate::geo::{haversine_distance, GeoPoint, EARTH_RADIUS_KM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeographicModel {
    pub y0: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "t1")]
    pub t1_km: f64,
    /// Scales the expected count of every bin.
    pub intensity: f64,
}

impl Default for GeographicModel {
    fn default() -> Self {
        Self { y0: 2.0, a1: 10.0, t1_km: 3000.0, intensity: 1.0 }
    }
}

impl GeographicModel {
    pub fn expected(&self, distance_km: f64) -> f64 {
        self.intensity * (self.y0 + self.a1 * (-distance_km / self.t1_km).exp())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_papers: usize,
    pub n_institutions: usize,
    pub n_countries: usize,
    /// Institutions lie within this distance of their country centre.
    pub country_radius_km: f64,
    pub authors_per_institution: usize,
    pub bin_width_km: f64,
    pub model: GeographicModel,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_papers: 500,
            n_institutions: 50,
            n_countries: 8,
            country_radius_km: 1500.0,
            authors_per_institution: 5,
            bin_width_km: 100.0,
            model: GeographicModel::default(),
            seed: 0,
        }
    }
}

fn uniform_on_sphere(rng: &mut ChaCha8Rng) -> GeoPoint {
    let lat = (2.0 * rng.random::<f64>() - 1.0).asin().to_degrees();
    let lon = rng.random_range(-180.0..180.0);
    GeoPoint::new(lat, lon).expect("in range")
}

/// Point at `distance_km` along `bearing` (radians) from `from`.
fn destination(from: &GeoPoint, bearing: f64, distance_km: f64) -> GeoPoint {
    let (lat1, lon1) = (from.lat().to_radians(), from.lon().to_radians());
    let delta = distance_km / EARTH_RADIUS_KM;
    let lat2 = (lat1.sin() * delta.cos() + lat1.cos() * delta.sin() * bearing.cos()).asin();
    let lon2 = lon1 + (bearing.sin() * delta.sin() * lat1.cos()).atan2(delta.cos() - lat1.sin() * lat2.sin());
    let lon2 = (lon2.to_degrees() + 540.0).rem_euclid(360.0) - 180.0;
    GeoPoint::new(lat2.to_degrees().clamp(-90.0, 90.0), lon2.clamp(-180.0, 180.0)).expect("normalised")
}

fn country_code(k: usize) -> String {
    // ISO 3166 user-assigned range XA..XZ.
    format!("X{}", (b'A' + k as u8) as char)
}

pub fn synth_corpus(cfg: &SynthConfig) -> Result<Corpus, CorpusError> {
    if cfg.n_papers == 0 {
        return Err(CorpusError::Synth("n_papers must be at least 1".into()));
    }
    if cfg.n_institutions == 0 || cfg.n_countries == 0 || cfg.n_countries > 26 {
        return Err(CorpusError::Synth("need 1..=26 countries and at least one institution".into()));
    }
    if cfg.authors_per_institution == 0 || !(cfg.bin_width_km > 0.0) || !(cfg.model.t1_km > 0.0) {
        return Err(CorpusError::Synth("authors, bin width and t1 must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let centres: Vec<GeoPoint> = (0..cfg.n_countries).map(|_| uniform_on_sphere(&mut rng)).collect();
    let institutions: Vec<Institution> = (0..cfg.n_institutions)
        .map(|k| {
            let c = k % cfg.n_countries;
            let bearing = rng.random_range(0.0..std::f64::consts::TAU);
            let r = cfg.country_radius_km * rng.random::<f64>().sqrt();
            Institution {
                institution_id: format!("I{k:03}"),
                name: format!("Institute {k}"),
                location: Some(destination(&centres[c], bearing, r)),
                country: Some(country_code(c)),
            }
        })
        .collect();

    // Papers round-robin over institutions; index order is publication order.
    let start = NaiveDate::from_ymd_opt(1990, 1, 1).expect("valid date");
    let mut papers: Vec<PaperRecord> = (0..cfg.n_papers)
        .map(|p| {
            let inst = p % cfg.n_institutions;
            let n_auth = rng.random_range(1..=cfg.authors_per_institution.min(3));
            let mut picked: Vec<usize> = Vec::new();
            while picked.len() < n_auth {
                let a = rng.random_range(0..cfg.authors_per_institution);
                if !picked.contains(&a) {
                    picked.push(a);
                }
            }
            PaperRecord {
                paper_id: format!("P{p:05}"),
                title: format!("Synthetic paper {p}"),
                authors: picked
                    .iter()
                    .map(|a| Author {
                        name: format!("Author {inst}-{a}"),
                        affiliation: institutions[inst].institution_id.clone(),
                    })
                    .collect(),
                publication_date: start.checked_add_days(Days::new(p as u64)).expect("date in range"),
                cited_paper_ids: Vec::new(),
            }
        })
        .collect();

    let by_inst: Vec<Vec<usize>> =
        (0..cfg.n_institutions).map(|i| (i..cfg.n_papers).step_by(cfg.n_institutions).collect()).collect();

    // Usable ordered institution pairs grouped by distance bin.
    let mut bins: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for a in 0..cfg.n_institutions {
        for b in a..cfg.n_institutions {
            let usable = if a == b { by_inst[a].len() >= 2 } else { !by_inst[a].is_empty() && !by_inst[b].is_empty() };
            if !usable {
                continue;
            }
            let (pa, pb) = (institutions[a].location.expect("set"), institutions[b].location.expect("set"));
            let d = haversine_distance(&pa, &pb, EARTH_RADIUS_KM);
            bins.entry((d / cfg.bin_width_km).floor() as usize).or_default().push((a, b));
        }
    }

    let mut cited: Vec<HashSet<usize>> = vec![HashSet::new(); cfg.n_papers];
    let mut shortfall = 0usize;
    for (k, pairs) in &bins {
        let mid = (*k as f64 + 0.5) * cfg.bin_width_km;
        let lambda = cfg.model.expected(mid);
        let draws = if lambda > 0.0 {
            Poisson::new(lambda).map_err(|e| CorpusError::Synth(e.to_string()))?.sample(&mut rng) as usize
        } else {
            0
        };
        for _ in 0..draws {
            let mut placed = false;
            for _attempt in 0..50 {
                let (a, b) = pairs[rng.random_range(0..pairs.len())];
                let x = by_inst[a][rng.random_range(0..by_inst[a].len())];
                let y = by_inst[b][rng.random_range(0..by_inst[b].len())];
                if x == y {
                    continue;
                }
                let (newer, older) = if x > y { (x, y) } else { (y, x) };
                if cited[newer].insert(older) {
                    placed = true;
                    break;
                }
            }
            if !placed {
                shortfall += 1;
            }
        }
    }
    if shortfall > 0 {
        log::warn!("synthetic generator could not place {shortfall} citations (paper pairs exhausted)");
    }
    for (p, set) in cited.into_iter().enumerate() {
        let mut ids: Vec<usize> = set.into_iter().collect();
        ids.sort_unstable();
        papers[p].cited_paper_ids = ids.into_iter().map(|q| format!("P{q:05}")).collect();
    }

    let mut corpus = Corpus::from_records(papers);
    corpus.institutions = institutions;
    Ok(corpus)
}
