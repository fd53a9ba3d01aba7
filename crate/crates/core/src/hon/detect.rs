use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{kl_divergence, ConditionalCounts, LogBase};

/// Minimum path support for the divergence test; `Infinite` disables detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MinSupport {
    At(u64),
    Infinite,
}

impl MinSupport {
    pub fn admits(&self, support: u64) -> bool {
        match self {
            MinSupport::At(m) => support >= *m,
            MinSupport::Infinite => false,
        }
    }
}

impl fmt::Display for MinSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinSupport::At(m) => write!(f, "{m}"),
            MinSupport::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for MinSupport {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(MinSupport::Infinite),
            n => n
                .parse::<u64>()
                .map(MinSupport::At)
                .map_err(|_| format!("min support {s:?} is neither a count nor inf")),
        }
    }
}

impl Serialize for MinSupport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MinSupport::At(m) => s.serialize_u64(*m),
            MinSupport::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for MinSupport {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(MinSupport::At(n)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Paper `path.last()` conditioned on the preceding steps of `path`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HigherOrderNode {
    /// Oldest step first; length equals the order k.
    pub path: Vec<usize>,
    pub support: u64,
    pub divergence: f64,
    pub threshold: f64,
}

impl HigherOrderNode {
    pub fn base(&self) -> usize {
        *self.path.last().expect("nonempty path")
    }

    pub fn order(&self) -> usize {
        self.path.len()
    }

    /// Prior steps, most recent first.
    pub fn context(&self) -> Vec<usize> {
        self.path[..self.path.len() - 1].iter().rev().copied().collect()
    }
}

/// Contexts of order `k ∈ [2, order]` whose successor distribution departs
/// from the first-order one by more than `k / log(support)`.
///
/// Only paths with `support ≥ min_support` and `support > 1` are tested.
/// The result is sorted by order, then path.
pub fn detect_higher_order(
    counts: &ConditionalCounts,
    order: usize,
    min_support: MinSupport,
    base: LogBase,
) -> Vec<HigherOrderNode> {
    let mut found = Vec::new();
    if order < 2 {
        return found;
    }
    for (path, succ) in counts.iter() {
        let k = path.len();
        if !(2..=order).contains(&k) {
            continue;
        }
        let support: u64 = succ.values().sum();
        if support <= 1 || !min_support.admits(support) {
            continue;
        }
        let current = path[k - 1];
        let Some(lower) = counts.successors(&[current]) else { continue };
        let lower_support: u64 = lower.values().sum();
        let keys: BTreeSet<usize> = succ.keys().chain(lower.keys()).copied().collect();
        let p: Vec<f64> = keys.iter().map(|t| *succ.get(t).unwrap_or(&0) as f64 / support as f64).collect();
        let q: Vec<f64> = keys.iter().map(|t| *lower.get(t).unwrap_or(&0) as f64 / lower_support as f64).collect();
        let Ok(divergence) = kl_divergence(&p, &q, base) else {
            log::warn!("path {path:?} has successors unseen at first order; skipped");
            continue;
        };
        let threshold = k as f64 / base.log(support as f64);
        if divergence > threshold {
            found.push(HigherOrderNode { path: path.clone(), support, divergence, threshold });
        }
    }
    found.sort_by(|a, b| (a.path.len(), &a.path).cmp(&(b.path.len(), &b.path)));
    found
}
