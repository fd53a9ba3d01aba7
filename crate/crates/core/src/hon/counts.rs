use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CitationChain, HonError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log(&self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "e" | "natural" | "ln" => Ok(LogBase::Natural),
            "2" | "two" | "log2" => Ok(LogBase::Two),
            other => Err(format!("unknown log base {other:?} (expected natural or 2)")),
        }
    }
}

/// Successor tallies per node path (oldest step first, current node last).
///
/// Each path's support is the sum of its successor counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConditionalCounts {
    order: usize,
    paths: BTreeMap<Vec<usize>, BTreeMap<usize, u64>>,
}

impl ConditionalCounts {
    pub fn new(order: usize) -> Self {
        Self { order, paths: BTreeMap::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn add(&mut self, path: &[usize], next: usize, n: u64) {
        *self.paths.entry(path.to_vec()).or_default().entry(next).or_insert(0) += n;
    }

    pub fn merge(&mut self, other: ConditionalCounts) {
        self.order = self.order.max(other.order);
        for (path, succ) in other.paths {
            let into = self.paths.entry(path).or_default();
            for (t, n) in succ {
                *into.entry(t).or_insert(0) += n;
            }
        }
    }

    pub fn count(&self, path: &[usize], next: usize) -> u64 {
        self.paths.get(path).and_then(|s| s.get(&next)).copied().unwrap_or(0)
    }

    pub fn support(&self, path: &[usize]) -> u64 {
        self.paths.get(path).map_or(0, |s| s.values().sum())
    }

    pub fn successors(&self, path: &[usize]) -> Option<&BTreeMap<usize, u64>> {
        self.paths.get(path)
    }

    /// Paths in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &BTreeMap<usize, u64>)> {
        self.paths.iter()
    }

    /// Number of distinct paths.
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

fn count_chain(counts: &mut ConditionalCounts, chain: &[usize], order: usize) {
    for t in 0..chain.len().saturating_sub(1) {
        for ctx in 0..order.min(t + 1) {
            counts.add(&chain[t - ctx..=t], chain[t + 1], 1);
        }
    }
}

/// Every transition in every chain, counted under each context length
/// `0..order` that fits before it.
pub fn count_subchains(chains: &[CitationChain], order: usize) -> ConditionalCounts {
    let order = order.max(1);
    chains
        .par_chunks(1024)
        .map(|chunk| {
            let mut c = ConditionalCounts::new(order);
            for chain in chunk {
                count_chain(&mut c, chain, order);
            }
            c
        })
        .reduce(
            || ConditionalCounts::new(order),
            |mut a, b| {
                a.merge(b);
                a
            },
        )
}

/// `N(path → next) / support(path)`.
pub fn conditional_probability(counts: &ConditionalCounts, path: &[usize], next: usize) -> Result<f64, HonError> {
    let support = counts.support(path);
    if support == 0 {
        return Err(HonError::ZeroSupport(path.to_vec()));
    }
    Ok(counts.count(path, next) as f64 / support as f64)
}

/// `Σ p·log(p/q)` over aligned distributions, with `0·log(0/q) = 0`.
pub fn kl_divergence(higher: &[f64], lower: &[f64], base: LogBase) -> Result<f64, HonError> {
    if higher.len() != lower.len() {
        return Err(HonError::Mismatch(higher.len(), lower.len()));
    }
    let mut d = 0.0;
    for (j, (&p, &q)) in higher.iter().zip(lower).enumerate() {
        if p == 0.0 {
            continue;
        }
        if q <= 0.0 {
            return Err(HonError::UndefinedDivergence(j));
        }
        d += p * base.log(p / q);
    }
    // Rounding can leave a tiny negative value for equal inputs.
    Ok(d.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn repeated_chain_counts() {
        let chains = vec![vec![0, 1, 2]; 3];
        let c = count_subchains(&chains, 2);
        assert_eq!(c.count(&[0, 1], 2), 3);
        assert_eq!(c.count(&[1], 2), 3);
        assert_eq!(c.count(&[0], 1), 3);
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn no_chains_no_counts() {
        assert!(count_subchains(&[], 3).is_empty());
        assert!(count_subchains(&[vec![4]], 3).is_empty());
    }

    #[test]
    fn ratio_of_counts() {
        let mut c = ConditionalCounts::new(2);
        c.add(&[0, 1], 2, 3);
        c.add(&[0, 1], 3, 1);
        assert_eq!(conditional_probability(&c, &[0, 1], 2).unwrap(), 0.75);
        c.add(&[5], 6, 9);
        assert_eq!(conditional_probability(&c, &[5], 6).unwrap(), 1.0);
        assert_eq!(conditional_probability(&c, &[7], 6), Err(HonError::ZeroSupport(vec![7])));
    }

    #[test]
    fn divergence_values() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7], LogBase::Natural).unwrap(), 0.0);
        let d = kl_divergence(&[0.9, 0.1], &[0.5, 0.5], LogBase::Natural).unwrap();
        assert!((d - (0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln())).abs() < 1e-15);
        assert!((d - 0.368_064).abs() < 1e-6);
        let d2 = kl_divergence(&[0.9, 0.1], &[0.5, 0.5], LogBase::Two).unwrap();
        assert!((d2 - d / 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0], LogBase::Natural), Err(HonError::UndefinedDivergence(1)));
        assert_eq!(kl_divergence(&[0.0, 1.0], &[0.0, 1.0], LogBase::Natural).unwrap(), 0.0);
    }

    /// Brute-force window scan used as the counting oracle.
    fn oracle(chains: &[Vec<usize>], order: usize) -> BTreeMap<(Vec<usize>, usize), u64> {
        let mut m = BTreeMap::new();
        for c in chains {
            for len in 2..=order + 1 {
                if c.len() < len {
                    continue;
                }
                for start in 0..=c.len() - len {
                    let w = &c[start..start + len];
                    *m.entry((w[..len - 1].to_vec(), w[len - 1])).or_insert(0) += 1;
                }
            }
        }
        m
    }

    fn random_chains(seed: u64, n: usize) -> Vec<Vec<usize>> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..rng.random_range(1..9)).map(|_| rng.random_range(0..6)).collect()).collect()
    }

    #[test]
    fn thousand_chains_match_window_oracle() {
        let chains = random_chains(17, 1000);
        for order in 1..=3 {
            let c = count_subchains(&chains, order);
            let o = oracle(&chains, order);
            let mine: BTreeMap<(Vec<usize>, usize), u64> =
                c.iter().flat_map(|(p, s)| s.iter().map(move |(t, n)| ((p.clone(), *t), *n))).collect();
            assert_eq!(mine, o);
        }
    }

    proptest! {
        #[test]
        fn gibbs_inequality(p in prop::collection::vec(0.0f64..1.0, 1..8), q in prop::collection::vec(0.01f64..1.0, 8)) {
            let sp: f64 = p.iter().sum();
            prop_assume!(sp > 1e-9);
            let p: Vec<f64> = p.iter().map(|x| x / sp).collect();
            let q = &q[..p.len()];
            let sq: f64 = q.iter().sum();
            let q: Vec<f64> = q.iter().map(|x| x / sq).collect();
            let d = kl_divergence(&p, &q, LogBase::Natural).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert!(kl_divergence(&p, &p, LogBase::Natural).unwrap() <= 1e-12);
        }

        #[test]
        fn supports_equal_successor_sums(seed in 0u64..500) {
            let c = count_subchains(&random_chains(seed, 40), 3);
            for (path, succ) in c.iter() {
                prop_assert_eq!(c.support(path), succ.values().sum::<u64>());
                let total: f64 = succ.keys().map(|t| conditional_probability(&c, path, *t).unwrap()).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
