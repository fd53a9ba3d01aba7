use serde::{Deserialize, Serialize};

use super::GeoError;

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Floor applied to the relative citation weight so that same-location
/// citations keep a nonzero transition probability.
pub const DEFAULT_WEIGHT_FLOOR: f64 = 1e-3;

/// A latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::Latitude(lat));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::Longitude(lon));
        }
        Ok(Self { lat, lon })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Great-circle distance between `a` and `b` on a sphere of radius `radius_km`.
///
/// The haversine argument is clamped to `[0, 1]` so rounding near antipodes
/// cannot push `asin` out of its domain. The result always lies in
/// `[0, π·radius_km]`.
pub fn haversine_distance(a: &GeoPoint, b: &GeoPoint, radius_km: f64) -> f64 {
    let (lat_a, lat_b) = (a.lat.to_radians(), b.lat.to_radians());
    let d_lat = (a.lat - b.lat).abs().to_radians();
    let d_lon = (a.lon - b.lon).abs().to_radians();
    let h = (d_lat / 2.0).sin().powi(2) + lat_a.cos() * lat_b.cos() * (d_lon / 2.0).sin().powi(2);
    2.0 * radius_km * h.clamp(0.0, 1.0).sqrt().asin().abs()
}

/// Source of institution-to-institution distances.
///
/// Only the great-circle provider ships; land-route providers (distances
/// that avoid oceans, obtained from an external routing service) plug in
/// here.
pub trait DistanceProvider: Send + Sync {
    fn distance_km(&self, a: &GeoPoint, b: &GeoPoint) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreatCircle {
    pub radius_km: f64,
}

impl Default for GreatCircle {
    fn default() -> Self {
        Self { radius_km: EARTH_RADIUS_KM }
    }
}

impl DistanceProvider for GreatCircle {
    fn distance_km(&self, a: &GeoPoint, b: &GeoPoint) -> f64 {
        haversine_distance(a, b, self.radius_km)
    }
}

/// Exact O(n²) scan for the largest pairwise distance.
pub fn max_pairwise_distance(points: &[GeoPoint], provider: &dyn DistanceProvider) -> Result<f64, GeoError> {
    if points.len() < 2 {
        return Err(GeoError::TooFewPoints(points.len()));
    }
    let mut best = 0.0_f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(provider.distance_km(a, b));
        }
    }
    Ok(best)
}

/// Relative citation weight `max(d / d_max, floor)`.
///
/// A distance that exceeds `d_max` by rounding only is clamped to weight 1.
pub fn relative_weight(d: f64, d_max: f64, floor: f64) -> Result<f64, GeoError> {
    if !(floor > 0.0 && floor < 1.0) {
        return Err(GeoError::WeightFloor(floor));
    }
    if !(d_max > 0.0) {
        return Err(GeoError::ZeroMaxDistance);
    }
    if !(d >= 0.0) || d > d_max * (1.0 + 1e-12) {
        return Err(GeoError::DistanceOutOfRange { d, d_max });
    }
    Ok((d / d_max).min(1.0).max(floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    #[test]
    fn rejects_out_of_range_coordinates() {
        assert_eq!(GeoPoint::new(90.5, 0.0), Err(GeoError::Latitude(90.5)));
        assert_eq!(GeoPoint::new(0.0, -180.1), Err(GeoError::Longitude(-180.1)));
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn identical_points_are_zero_apart() {
        let a = p(41.5945343, -88.0411993);
        assert_eq!(haversine_distance(&a, &a, EARTH_RADIUS_KM), 0.0);
    }

    #[test]
    fn pole_to_pole_is_half_circumference() {
        let d = haversine_distance(&p(90.0, 0.0), &p(-90.0, 0.0), EARTH_RADIUS_KM);
        let expected = std::f64::consts::PI * EARTH_RADIUS_KM;
        assert!((d - expected).abs() / expected < 1e-12, "{d}");
        assert!((d - 20015.09).abs() < 0.01);
    }

    #[test]
    fn max_distance_picks_the_antipodal_pair() {
        let pts = [p(0.0, 0.0), p(0.0, 90.0), p(0.0, 180.0)];
        let d = max_pairwise_distance(&pts, &GreatCircle::default()).unwrap();
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_KM).abs() < 1e-9);
    }

    #[test]
    fn max_distance_of_identical_points_is_zero() {
        let a = p(10.0, 10.0);
        assert_eq!(max_pairwise_distance(&[a, a], &GreatCircle::default()).unwrap(), 0.0);
        assert_eq!(relative_weight(0.0, 0.0, 1e-3), Err(GeoError::ZeroMaxDistance));
    }

    #[test]
    fn max_distance_needs_two_points() {
        assert_eq!(max_pairwise_distance(&[p(0.0, 0.0)], &GreatCircle::default()), Err(GeoError::TooFewPoints(1)));
    }

    #[test]
    fn relative_weight_examples() {
        assert_eq!(relative_weight(20000.0, 20000.0, 1e-3).unwrap(), 1.0);
        assert_eq!(relative_weight(0.0, 20000.0, 1e-3).unwrap(), 1e-3);
        assert_eq!(relative_weight(5000.0, 20000.0, 1e-3).unwrap(), 0.25);
        assert!(relative_weight(-1.0, 10.0, 1e-3).is_err());
        assert!(relative_weight(11.0, 10.0, 1e-3).is_err());
        assert!(relative_weight(1.0, 10.0, 0.0).is_err());
        assert!(relative_weight(1.0, 10.0, 1.0).is_err());
    }

    fn arb_point() -> impl Strategy<Value = GeoPoint> {
        (-90.0..=90.0f64, -180.0..=180.0f64).prop_map(|(a, b)| p(a, b))
    }

    proptest! {
        #[test]
        fn haversine_is_symmetric_and_bounded(a in arb_point(), b in arb_point()) {
            let ab = haversine_distance(&a, &b, EARTH_RADIUS_KM);
            let ba = haversine_distance(&b, &a, EARTH_RADIUS_KM);
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            prop_assert!(ab <= std::f64::consts::PI * EARTH_RADIUS_KM * (1.0 + 1e-12));
        }

        #[test]
        fn haversine_triangle_inequality(a in arb_point(), b in arb_point(), c in arb_point()) {
            let r = EARTH_RADIUS_KM;
            let ac = haversine_distance(&a, &c, r);
            let via = haversine_distance(&a, &b, r) + haversine_distance(&b, &c, r);
            prop_assert!(ac <= via + 1e-6);
        }

        #[test]
        fn relative_weight_is_monotone(d_max in 1.0..20000.0f64, x in 0.0..1.0f64, y in 0.0..1.0f64) {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let wl = relative_weight(lo * d_max, d_max, 1e-3).unwrap();
            let wh = relative_weight(hi * d_max, d_max, 1e-3).unwrap();
            prop_assert!(wl <= wh);
            prop_assert!(wl > 0.0 && wh <= 1.0);
        }
    }
}
