use serde::{Deserialize, Serialize};

use super::{HigherOrderGraph, HonError};

/// Dense column-stochastic matrix, stored column-major: `data[j·n + k] = G[k][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    n: usize,
    alpha: f64,
    data: Vec<f64>,
}

const COLUMN_TOL: f64 = 1e-12;

impl StochasticMatrix {
    /// Wraps column-major data after checking every column sums to 1.
    pub fn from_columns(n: usize, data: Vec<f64>, alpha: f64) -> Result<Self, HonError> {
        if n == 0 {
            return Err(HonError::EmptyGraph);
        }
        if data.len() != n * n {
            return Err(HonError::Shape { got: data.len(), expected: n * n });
        }
        let m = Self { n, alpha, data };
        m.validate()?;
        Ok(m)
    }

    /// From a row-major nested array, mainly for tests and examples.
    pub fn from_rows(rows: &[Vec<f64>], alpha: f64) -> Result<Self, HonError> {
        let n = rows.len();
        let mut data = vec![0.0; n * n];
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(HonError::Shape { got: row.len(), expected: n });
            }
            for (j, v) in row.iter().enumerate() {
                data[j * n + k] = *v;
            }
        }
        Self::from_columns(n, data, alpha)
    }

    pub fn validate(&self) -> Result<(), HonError> {
        for j in 0..self.n {
            let col = self.column(j);
            if let Some(k) = col.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(HonError::BadEntry { row: k, col: j });
            }
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > COLUMN_TOL {
                return Err(HonError::NotStochastic { col: j, sum });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Entry `G[k][j]`, the probability of moving from `j` to `k`.
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[j * self.n + k]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `G·x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yk, g) in y.iter_mut().zip(self.column(j)) {
                    *yk += g * xj;
                }
            }
        }
        y
    }

    pub fn max_abs_diff(&self, other: &StochasticMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Column `j` holds `probability·weight` over the out-edges of `j`,
/// renormalised; columns without out-edges become uniform. The result is
/// damped as `alpha·G + (1 − alpha)/N`.
pub fn build_transition_matrix(graph: &HigherOrderGraph, alpha: f64) -> Result<StochasticMatrix, HonError> {
    let n = graph.node_count();
    if n == 0 {
        return Err(HonError::EmptyGraph);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(HonError::Alpha(alpha));
    }
    let teleport = (1.0 - alpha) / n as f64;
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        let col = &mut data[j * n..(j + 1) * n];
        let out = graph.out_edges(j);
        let total: f64 = out.iter().map(|e| e.probability * e.weight).sum();
        if out.is_empty() || total <= 0.0 {
            col.fill(1.0 / n as f64);
        } else {
            for e in out {
                col[e.target] += e.probability * e.weight / total;
            }
            for v in col.iter_mut() {
                *v = alpha * *v + teleport;
            }
        }
        // Remove the rounding residue so columns sum to 1 to working precision.
        let sum: f64 = col.iter().sum();
        for v in col.iter_mut() {
            *v /= sum;
        }
    }
    StochasticMatrix::from_columns(n, data, alpha)
}
