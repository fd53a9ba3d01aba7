//! Great-circle distances between a few physics institutions and the
//! relative citation weights they induce.

use citerank::geo::{
    haversine_distance, max_pairwise_distance, relative_weight, GeoPoint, GreatCircle, DEFAULT_WEIGHT_FLOOR,
    EARTH_RADIUS_KM,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sites = [
        ("Los Alamos", GeoPoint::new(35.8800364, -106.3031138)?),
        ("Michigan State", GeoPoint::new(42.727455, -84.498557)?),
        ("Argonne", GeoPoint::new(41.5945343, -88.0411993)?),
        ("Saclay", GeoPoint::new(48.7082852, 2.1620986)?),
        ("Dubna", GeoPoint::new(56.7417029, 37.1911003)?),
    ];
    let points: Vec<GeoPoint> = sites.iter().map(|s| s.1).collect();
    let d_max = max_pairwise_distance(&points, &GreatCircle::default())?;
    println!("largest separation: {d_max:.1} km\n");
    println!("{:<16} {:<16} {:>10} {:>8}", "citing", "cited", "km", "weight");
    for (i, (a, pa)) in sites.iter().enumerate() {
        for (b, pb) in &sites[i + 1..] {
            let d = haversine_distance(pa, pb, EARTH_RADIUS_KM);
            let w = relative_weight(d, d_max, DEFAULT_WEIGHT_FLOOR)?;
            println!("{a:<16} {b:<16} {d:>10.1} {w:>8.4}");
        }
    }
    Ok(())
}
