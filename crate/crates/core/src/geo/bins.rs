use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    haversine_distance, spherical_centroid, ClusterAssignment, ClusterLabel, GeoError, GeoPoint, EARTH_RADIUS_KM,
};
use crate::corpus::{CitationEdge, CitationGraph};

/// Which citations enter a distance series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinFilter {
    All,
    Intra,
    Inter,
}

impl BinFilter {
    pub const ALL: [BinFilter; 3] = [BinFilter::All, BinFilter::Intra, BinFilter::Inter];

    pub fn as_str(&self) -> &'static str {
        match self {
            BinFilter::All => "all",
            BinFilter::Intra => "intra",
            BinFilter::Inter => "inter",
        }
    }

    /// Edges lacking a country on either side only pass the `All` filter.
    fn admits(&self, citing: Option<&str>, cited: Option<&str>) -> bool {
        match self {
            BinFilter::All => true,
            BinFilter::Intra => matches!((citing, cited), (Some(a), Some(b)) if a == b),
            BinFilter::Inter => matches!((citing, cited), (Some(a), Some(b)) if a != b),
        }
    }
}

impl fmt::Display for BinFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BinFilter {
    type Err = GeoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(BinFilter::All),
            "intra" | "intra-country" => Ok(BinFilter::Intra),
            "inter" | "inter-country" => Ok(BinFilter::Inter),
            other => Err(GeoError::UnknownFilter(other.to_string())),
        }
    }
}

/// Citation counts over contiguous distance bins `[k·w, (k+1)·w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceBinSeries {
    pub bin_width_km: f64,
    pub filter: BinFilter,
    pub counts: Vec<u64>,
}

impl DistanceBinSeries {
    /// An all-zero series wide enough to hold every great-circle distance.
    pub fn empty(bin_width_km: f64, filter: BinFilter) -> Result<Self, GeoError> {
        if !(bin_width_km > 0.0 && bin_width_km.is_finite()) {
            return Err(GeoError::BinWidth(bin_width_km));
        }
        let n = (std::f64::consts::PI * EARTH_RADIUS_KM / bin_width_km).floor() as usize + 1;
        Ok(Self { bin_width_km, filter, counts: vec![0; n] })
    }

    pub fn add(&mut self, distance_km: f64) {
        let k = (distance_km / self.bin_width_km).floor() as usize;
        if k >= self.counts.len() {
            self.counts.resize(k + 1, 0);
        }
        self.counts[k] += 1;
    }

    pub fn bin_low(&self, k: usize) -> f64 {
        k as f64 * self.bin_width_km
    }

    pub fn bin_high(&self, k: usize) -> f64 {
        (k + 1) as f64 * self.bin_width_km
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.bin_width_km
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(bin midpoint, count)` for every nonempty bin.
    pub fn nonempty_points(&self) -> Vec<(f64, f64)> {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, &c)| (self.midpoint(k), c as f64)).collect()
    }

    /// CSV with header `bin_low_km,bin_high_km,citations,filter`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_low_km", "bin_high_km", "citations", "filter"])?;
        for (k, c) in self.counts.iter().enumerate() {
            w.write_record([
                self.bin_low(k).to_string(),
                self.bin_high(k).to_string(),
                c.to_string(),
                self.filter.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn countries<'a>(graph: &'a CitationGraph, e: &CitationEdge) -> (Option<&'a str>, Option<&'a str>) {
    let country = |i: Option<usize>| i.and_then(|i| graph.institutions[i].country.as_deref());
    (country(e.citing_institution), country(e.cited_institution))
}

/// Grouping analysis: every edge with both endpoints resolved adds one to the
/// bin containing its institution distance.
pub fn bin_citations_by_distance(
    graph: &CitationGraph,
    bin_width_km: f64,
    filter: BinFilter,
) -> Result<DistanceBinSeries, GeoError> {
    let mut series = DistanceBinSeries::empty(bin_width_km, filter)?;
    for e in &graph.edges {
        let Some(d) = e.distance_km else { continue };
        let (a, b) = countries(graph, e);
        if filter.admits(a, b) {
            series.add(d);
        }
    }
    Ok(series)
}

/// Clustering analysis: like [`bin_citations_by_distance`] but the distance
/// is taken between the centroids of the DBSCAN clusters holding the two
/// institutions. Noise institutions stand for themselves.
pub fn bin_citations_by_cluster_distance(
    graph: &CitationGraph,
    clusters: &ClusterAssignment,
    bin_width_km: f64,
    filter: BinFilter,
) -> Result<DistanceBinSeries, GeoError> {
    let mut members: HashMap<usize, Vec<GeoPoint>> = HashMap::new();
    let mut label_of: HashMap<&str, ClusterLabel> = HashMap::new();
    for ((id, pt), label) in clusters.points.iter().zip(&clusters.labels) {
        label_of.insert(id.as_str(), *label);
        if let ClusterLabel::Cluster(c) = label {
            members.entry(*c).or_default().push(*pt);
        }
    }
    let centroids: HashMap<usize, GeoPoint> = members.iter().map(|(c, pts)| (*c, spherical_centroid(pts))).collect();

    let representative = |inst: usize| -> Option<GeoPoint> {
        let institution = &graph.institutions[inst];
        let own = institution.location?;
        match label_of.get(institution.institution_id.as_str()) {
            Some(ClusterLabel::Cluster(c)) => centroids.get(c).copied(),
            _ => Some(own),
        }
    };

    let mut series = DistanceBinSeries::empty(bin_width_km, filter)?;
    for e in &graph.edges {
        if e.distance_km.is_none() {
            continue;
        }
        let (Some(a), Some(b)) = (e.citing_institution, e.cited_institution) else { continue };
        let (Some(pa), Some(pb)) = (representative(a), representative(b)) else { continue };
        let (ca, cb) = countries(graph, e);
        if filter.admits(ca, cb) {
            series.add(haversine_distance(&pa, &pb, EARTH_RADIUS_KM));
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_lands_in_its_hundred_km_group() {
        let mut s = DistanceBinSeries::empty(100.0, BinFilter::All).unwrap();
        s.add(250.0);
        assert_eq!(s.counts[2], 1);
        assert_eq!((s.bin_low(2), s.bin_high(2)), (200.0, 300.0));
        assert_eq!(s.total(), 1);
    }

    #[test]
    fn bin_edges_are_half_open() {
        let mut s = DistanceBinSeries::empty(100.0, BinFilter::All).unwrap();
        s.add(200.0);
        s.add(199.999);
        assert_eq!(s.counts[1], 1);
        assert_eq!(s.counts[2], 1);
    }

    #[test]
    fn empty_series_covers_half_circumference() {
        let s = DistanceBinSeries::empty(100.0, BinFilter::Inter).unwrap();
        assert_eq!(s.counts.len(), 201);
        assert_eq!(s.total(), 0);
        assert!(DistanceBinSeries::empty(0.0, BinFilter::All).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let mut s = DistanceBinSeries::empty(5000.0, BinFilter::Intra).unwrap();
        s.add(7000.0);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("bin_low_km,bin_high_km,citations,filter"));
        assert_eq!(lines.next(), Some("0,5000,0,intra"));
        assert_eq!(lines.next(), Some("5000,10000,1,intra"));
    }

    #[test]
    fn filters_parse_and_admit() {
        assert_eq!("intra".parse::<BinFilter>().unwrap(), BinFilter::Intra);
        assert!("sideways".parse::<BinFilter>().is_err());
        assert!(BinFilter::Intra.admits(Some("US"), Some("US")));
        assert!(!BinFilter::Intra.admits(Some("US"), None));
        assert!(BinFilter::Inter.admits(Some("US"), Some("FR")));
        assert!(!BinFilter::Inter.admits(None, Some("FR")));
        assert!(BinFilter::All.admits(None, None));
    }
}
