//! Density-based clustering (DBSCAN) of institutions under great-circle distance.
//!
//! A point is core when at least `min_pts` points, itself included, lie
//! within `eps` km of it. Clusters grow from core points in input order, so
//! labels are deterministic for a fixed ordering; a border point reachable
//! from two clusters keeps the first one that claimed it.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{haversine_distance, GeoError, GeoPoint, EARTH_RADIUS_KM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClusterLabel {
    Cluster(usize),
    Noise,
}

impl ClusterLabel {
    pub fn cluster(&self) -> Option<usize> {
        match self {
            ClusterLabel::Cluster(c) => Some(*c),
            ClusterLabel::Noise => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub points: Vec<(String, GeoPoint)>,
    pub labels: Vec<ClusterLabel>,
    pub eps_km: f64,
    pub min_pts: usize,
    pub n_clusters: usize,
}

impl ClusterAssignment {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == ClusterLabel::Noise).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for c in self.labels.iter().filter_map(ClusterLabel::cluster) {
            sizes[c] += 1;
        }
        sizes
    }
}

fn neighbours(points: &[(String, GeoPoint)], i: usize, eps_km: f64) -> Vec<usize> {
    let centre = &points[i].1;
    points
        .iter()
        .enumerate()
        .filter(|(_, (_, p))| haversine_distance(centre, p, EARTH_RADIUS_KM) <= eps_km)
        .map(|(j, _)| j)
        .collect()
}

pub fn dbscan_cluster(
    points: &[(String, GeoPoint)],
    eps_km: f64,
    min_pts: usize,
) -> Result<ClusterAssignment, GeoError> {
    if !(eps_km > 0.0) || min_pts == 0 {
        return Err(GeoError::DbscanParams { eps: eps_km, min_pts });
    }
    let n = points.len();
    // Region queries are independent; precompute them in parallel.
    let hoods: Vec<Vec<usize>> = (0..n).into_par_iter().map(|i| neighbours(points, i, eps_km)).collect();

    let mut labels = vec![ClusterLabel::Noise; n];
    let mut visited = vec![false; n];
    let mut next = 0usize;
    let mut queue = VecDeque::new();

    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        if hoods[start].len() < min_pts {
            continue;
        }
        let cluster = next;
        next += 1;
        labels[start] = ClusterLabel::Cluster(cluster);
        queue.extend(hoods[start].iter().copied());
        while let Some(q) = queue.pop_front() {
            if labels[q] == ClusterLabel::Noise {
                labels[q] = ClusterLabel::Cluster(cluster);
            }
            if visited[q] {
                continue;
            }
            visited[q] = true;
            if hoods[q].len() >= min_pts {
                queue.extend(hoods[q].iter().copied());
            }
        }
    }

    Ok(ClusterAssignment { points: points.to_vec(), labels, eps_km, min_pts, n_clusters: next })
}

/// Normalised mean of unit vectors, returned as latitude/longitude.
pub fn spherical_centroid(points: &[GeoPoint]) -> GeoPoint {
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for p in points {
        let (lat, lon) = (p.lat().to_radians(), p.lon().to_radians());
        x += lat.cos() * lon.cos();
        y += lat.cos() * lon.sin();
        z += lat.sin();
    }
    let lat = z.atan2((x * x + y * y).sqrt()).to_degrees();
    let lon = y.atan2(x).to_degrees();
    GeoPoint::new(lat.clamp(-90.0, 90.0), lon.clamp(-180.0, 180.0)).expect("clamped coordinates")
}
