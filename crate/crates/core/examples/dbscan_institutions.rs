//! Groups institutions around three cities with DBSCAN, leaving isolated
//! sites as noise.

use citerank::geo::{dbscan_cluster, spherical_centroid, ClusterLabel, GeoPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let cities = [("Chicago", 41.88, -87.63), ("Paris", 48.86, 2.35), ("Tokyo", 35.68, 139.69)];
    let mut points = Vec::new();
    for (name, lat, lon) in cities {
        for i in 0..8 {
            // Within roughly 20 km of the centre.
            let p = GeoPoint::new(lat + rng.random_range(-0.15..0.15), lon + rng.random_range(-0.15..0.15))?;
            points.push((format!("{name}-{i}"), p));
        }
    }
    points.push(("Svalbard".into(), GeoPoint::new(78.22, 15.65)?));
    points.push(("McMurdo".into(), GeoPoint::new(-77.85, 166.67)?));

    let assignment = dbscan_cluster(&points, 50.0, 5)?;
    println!("{} clusters, {} noise points", assignment.n_clusters, assignment.noise_count());
    for c in 0..assignment.n_clusters {
        let members: Vec<GeoPoint> = assignment
            .points
            .iter()
            .zip(&assignment.labels)
            .filter(|(_, l)| **l == ClusterLabel::Cluster(c))
            .map(|(p, _)| p.1)
            .collect();
        let centre = spherical_centroid(&members);
        println!("cluster {c}: {} sites around ({:.2}, {:.2})", members.len(), centre.lat(), centre.lon());
    }
    Ok(())
}
