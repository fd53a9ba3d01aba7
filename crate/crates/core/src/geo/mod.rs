//! Geographic side of the pipeline: great-circle distances, the relative
//! citation weight, distance-binned citation series, density clustering of
//! institutions and the exponential-decay model of citations over distance.

mod bins;
mod dbscan;
mod decay;
mod point;

pub use bins::{bin_citations_by_cluster_distance, bin_citations_by_distance, BinFilter, DistanceBinSeries};
pub use dbscan::{dbscan_cluster, spherical_centroid, ClusterAssignment, ClusterLabel};
pub use decay::{fit_exp_decay, fit_exp_decay_xy, ExpDecayFit, FitOptions};
pub use point::{
    haversine_distance, max_pairwise_distance, relative_weight, DistanceProvider, GeoPoint, GreatCircle,
    DEFAULT_WEIGHT_FLOOR, EARTH_RADIUS_KM,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    Longitude(f64),
    #[error("need at least 2 resolved points for a maximum distance, got {0}")]
    TooFewPoints(usize),
    #[error("maximum distance is zero; every resolved institution shares one location")]
    ZeroMaxDistance,
    #[error("distance {d} outside [0, {d_max}]")]
    DistanceOutOfRange { d: f64, d_max: f64 },
    #[error("weight floor must lie in (0, 1), got {0}")]
    WeightFloor(f64),
    #[error("bin width must be positive, got {0}")]
    BinWidth(f64),
    #[error("DBSCAN needs eps > 0 and min_pts >= 1 (eps = {eps}, min_pts = {min_pts})")]
    DbscanParams { eps: f64, min_pts: usize },
    #[error("exponential fit needs at least 4 nonempty bins, got {0}")]
    TooFewBins(usize),
    #[error("x and y series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("unknown bin filter {0:?} (expected all, intra or inter)")]
    UnknownFilter(String),
}
