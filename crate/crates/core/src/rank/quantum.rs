//! Szegedy-style walk on the space `|j⟩⊗|k⟩` of dimension N².
//!
//! With `|ψ_j⟩ = |j⟩ ⊗ Σ_k √G_kj |k⟩`, the reflection is
//! `π = 2 Σ_j |ψ_j⟩⟨ψ_j| − I`, the swap is `S|j,k⟩ = |k,j⟩` and one step is
//! `U = π·S`. Amplitudes are stored row-major by the first register, so
//! entry `j·N + k` belongs to `|j⟩|k⟩` and block `j` is the support of `|ψ_j⟩`.
//! `U` is applied in product form in O(N²) per step.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RankError;
use crate::hon::StochasticMatrix;

/// Default number of time steps averaged into the impact score.
pub const DEFAULT_STEPS: usize = 64;
/// Largest node count the walk accepts unless overridden.
pub const DEFAULT_MAX_NODES: usize = 2000;
/// Largest node count for which `U` may be materialised densely.
pub const DENSE_MAX_NODES: usize = 64;

const PARALLEL_MIN_NODES: usize = 64;
const DRIFT_TOL: f64 = 1e-10;
const DRIFT_CHECK_EVERY: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumWalkState {
    n: usize,
    amps: Vec<Complex64>,
}

impl QuantumWalkState {
    /// State over `n` nodes from `n²` amplitudes indexed `j·n + k`; not normalised.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self, RankError> {
        if amps.len() != n * n {
            return Err(RankError::Length(amps.len(), n * n));
        }
        Ok(Self { n, amps })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, j: usize, k: usize) -> Complex64 {
        self.amps[j * self.n + k]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn renormalize(&mut self) {
        let s = self.norm_sqr().sqrt();
        for a in &mut self.amps {
            *a /= s;
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuantumWalkState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Probability of observing each node in the second register.
    pub fn second_register_probabilities(&self) -> Vec<f64> {
        let n = self.n;
        let mut p = vec![0.0; n];
        for block in self.amps.chunks(n) {
            for (pk, a) in p.iter_mut().zip(block) {
                *pk += a.norm_sqr();
            }
        }
        p
    }
}

/// Product-form `U = π·S` for one transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkOperator {
    n: usize,
    /// `sqrt_g[j·N + k] = √G_kj`, i.e. block `j` is `|ψ_j⟩` without its first register.
    sqrt_g: Vec<f64>,
}

impl WalkOperator {
    pub fn new(g: &StochasticMatrix) -> Result<Self, RankError> {
        Self::with_cap(g, DEFAULT_MAX_NODES)
    }

    pub fn with_cap(g: &StochasticMatrix, max_nodes: usize) -> Result<Self, RankError> {
        if g.dim() > max_nodes {
            return Err(RankError::TooLarge { n: g.dim(), cap: max_nodes });
        }
        g.validate()?;
        Ok(Self { n: g.dim(), sqrt_g: g.data().iter().map(|v| v.sqrt()).collect() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn psi_vector(&self, j: usize) -> QuantumWalkState {
        let n = self.n;
        let mut amps = vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            amps[j * n + k] = Complex64::new(self.sqrt_g[j * n + k], 0.0);
        }
        QuantumWalkState { n, amps }
    }

    pub fn swap(&self, state: &mut QuantumWalkState) {
        let n = self.n;
        for j in 0..n {
            for k in j + 1..n {
                state.amps.swap(j * n + k, k * n + j);
            }
        }
    }

    pub fn reflect(&self, state: &mut QuantumWalkState) {
        let n = self.n;
        let reflect_block = |(block, psi): (&mut [Complex64], &[f64])| {
            let c: Complex64 = block.iter().zip(psi).map(|(a, p)| a * p).sum();
            for (a, p) in block.iter_mut().zip(psi) {
                *a = 2.0 * c * p - *a;
            }
        };
        if n >= PARALLEL_MIN_NODES {
            state.amps.par_chunks_mut(n).zip(self.sqrt_g.par_chunks(n)).for_each(reflect_block);
        } else {
            state.amps.chunks_mut(n).zip(self.sqrt_g.chunks(n)).for_each(reflect_block);
        }
    }

    /// One step `U = π·S`.
    pub fn apply(&self, state: &mut QuantumWalkState) {
        self.swap(state);
        self.reflect(state);
    }

    /// Dense real matrix of `U`, built from the definitions of `π` and `S`.
    /// `G` is real, so `U` is real orthogonal.
    pub fn to_dense(&self) -> Result<DMatrix<f64>, RankError> {
        let n = self.n;
        if n > DENSE_MAX_NODES {
            return Err(RankError::TooLarge { n, cap: DENSE_MAX_NODES });
        }
        let d = n * n;
        let mut pi = DMatrix::<f64>::zeros(d, d);
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    pi[(j * n + k, j * n + l)] = 2.0 * self.sqrt_g[j * n + k] * self.sqrt_g[j * n + l];
                }
            }
        }
        for i in 0..d {
            pi[(i, i)] -= 1.0;
        }
        let mut s = DMatrix::<f64>::zeros(d, d);
        for j in 0..n {
            for k in 0..n {
                s[(k * n + j, j * n + k)] = 1.0;
            }
        }
        Ok(pi * s)
    }
}

/// `max |UᵀU − I|` of a dense real operator.
pub fn unitarity_defect(u: &DMatrix<f64>) -> f64 {
    let mut p = u.transpose() * u;
    for i in 0..p.nrows() {
        p[(i, i)] -= 1.0;
    }
    p.amax()
}

/// `(1/√N) Σ_j |ψ_j⟩`.
pub fn prepare_initial_state(g: &StochasticMatrix) -> Result<QuantumWalkState, RankError> {
    g.validate()?;
    let n = g.dim();
    let scale = 1.0 / (n as f64).sqrt();
    let amps = g.data().iter().map(|v| Complex64::new(v.sqrt() * scale, 0.0)).collect();
    Ok(QuantumWalkState { n, amps })
}

/// Second-register distribution after `U^{2m}`.
pub fn step_probabilities(u: &WalkOperator, psi0: &QuantumWalkState, m: usize) -> Vec<f64> {
    let mut state = psi0.clone();
    for _ in 0..2 * m {
        u.apply(&mut state);
    }
    state.second_register_probabilities()
}

/// Rows `m = 0..=M` of per-node probabilities `P_{i,m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub rows: Vec<Vec<f64>>,
}

impl ScoreSeries {
    pub fn steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// CSV `node,m,P_im` using the given node labels.
    pub fn write_csv<W: Write>(&self, out: W, labels: &[String]) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "m", "P_im"])?;
        for (m, row) in self.rows.iter().enumerate() {
            for (i, p) in row.iter().enumerate() {
                w.write_record([labels[i].as_str(), &m.to_string(), &format!("{p:e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactScores {
    /// Time-averaged score per base paper.
    pub scores: Vec<f64>,
    /// Time-averaged score per walk node, before aggregation.
    pub node_scores: Vec<f64>,
    pub series: ScoreSeries,
    /// How many times accumulated rounding forced a renormalisation.
    pub renormalizations: usize,
    /// Largest gap between the average over the last M/2 steps and over all M.
    pub convergence_gap: f64,
}

impl ImpactScores {
    pub fn converged(&self) -> bool {
        self.convergence_gap <= 1e-3
    }
}

/// `S_i = (1/M) Σ_{m=1..M} P_{i,m}`, with node scores summed into
/// `base_map[node]`.
pub fn impact_scores(
    u: &WalkOperator,
    psi0: &QuantumWalkState,
    steps: usize,
    base_map: &[usize],
) -> Result<ImpactScores, RankError> {
    if steps == 0 {
        return Err(RankError::NoSteps);
    }
    let n = u.dim();
    if base_map.len() != n {
        return Err(RankError::Length(base_map.len(), n));
    }
    let n_base = base_map.iter().max().map_or(0, |m| m + 1);
    if let Some(&b) = base_map.iter().find(|&&b| b >= n) {
        return Err(RankError::BaseMap(b));
    }

    let mut state = psi0.clone();
    let mut rows = vec![state.second_register_probabilities()];
    let mut applied = 0usize;
    let mut renormalizations = 0usize;
    for _ in 1..=steps {
        for _ in 0..2 {
            u.apply(&mut state);
            applied += 1;
            if applied.is_multiple_of(DRIFT_CHECK_EVERY) && (state.norm_sqr() - 1.0).abs() > DRIFT_TOL {
                state.renormalize();
                renormalizations += 1;
            }
        }
        rows.push(state.second_register_probabilities());
    }

    let mean = |range: &[Vec<f64>]| -> Vec<f64> {
        let mut acc = vec![0.0; n];
        for row in range {
            for (a, p) in acc.iter_mut().zip(row) {
                *a += p;
            }
        }
        acc.iter().map(|a| a / range.len() as f64).collect()
    };
    let node_scores = mean(&rows[1..]);
    let tail = mean(&rows[1 + steps / 2..]);
    let convergence_gap = node_scores.iter().zip(&tail).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let mut scores = vec![0.0; n_base];
    for (node, s) in node_scores.iter().enumerate() {
        scores[base_map[node]] += s;
    }
    Ok(ImpactScores { scores, node_scores, series: ScoreSeries { rows }, renormalizations, convergence_gap })
}
