//! Least-squares fit of `y = y0 + A1·exp(-x / t1)` to a citation-distance series.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{DistanceBinSeries, GeoError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpDecayFit {
    pub y0: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "t1")]
    pub t1_km: f64,
    /// Euclidean norm of the residual vector at the solution.
    pub residual: f64,
    pub converged: bool,
    #[serde(skip)]
    pub iterations: usize,
}

impl ExpDecayFit {
    pub fn eval(&self, x: f64) -> f64 {
        model(&Vector3::new(self.y0, self.a1, self.t1_km), x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Stop once every parameter moves by less than this relative amount.
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 500, rel_tol: 1e-9 }
    }
}

fn model(p: &Vector3<f64>, x: f64) -> f64 {
    p[0] + p[1] * (-x / p[2]).exp()
}

fn sse(p: &Vector3<f64>, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (y - model(p, x)).powi(2)).sum()
}

/// Fits the nonempty bins of `series`, using bin midpoints as x.
pub fn fit_exp_decay(series: &DistanceBinSeries) -> Result<ExpDecayFit, GeoError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = series.nonempty_points().into_iter().unzip();
    fit_exp_decay_xy(&xs, &ys, FitOptions::default())
}

/// Damped Gauss–Newton (Levenberg–Marquardt) on raw `(x, y)` samples.
pub fn fit_exp_decay_xy(xs: &[f64], ys: &[f64], opts: FitOptions) -> Result<ExpDecayFit, GeoError> {
    if xs.len() != ys.len() {
        return Err(GeoError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 4 {
        return Err(GeoError::TooFewBins(xs.len()));
    }
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let xmin = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t1_init = if xmax > xmin { (xmax - xmin) / 3.0 } else { 1.0 };

    let mut p = Vector3::new(ymin, ymax - ymin, t1_init);
    let mut cost = sse(&p, xs, ys);
    let mut lambda = 1e-3;

    let finish = |p: Vector3<f64>, cost: f64, converged: bool, iterations: usize| ExpDecayFit {
        y0: p[0],
        a1: p[1],
        t1_km: p[2],
        residual: cost.sqrt(),
        converged: converged && p[2] > 0.0 && cost.is_finite(),
        iterations,
    };

    for iter in 1..=opts.max_iter {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&x, &y) in xs.iter().zip(ys) {
            let e = (-x / p[2]).exp();
            let j = Vector3::new(1.0, e, p[1] * e * x / (p[2] * p[2]));
            let r = y - (p[0] + p[1] * e);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let diag_floor = 1e-12 * jtj.diagonal().max().max(f64::MIN_POSITIVE);

        let step = loop {
            let mut damped = jtj;
            for k in 0..3 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(diag_floor);
            }
            let candidate = damped.lu().solve(&jtr).map(|d| (d, p + d));
            match candidate {
                Some((delta, next)) if next[2] > 0.0 && next.iter().all(|v| v.is_finite()) => {
                    let next_cost = sse(&next, xs, ys);
                    if next_cost <= cost {
                        lambda = (lambda / 10.0).max(1e-12);
                        break Some((delta, next, next_cost));
                    }
                }
                _ => {}
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                break None;
            }
        };

        let Some((delta, next, next_cost)) = step else {
            // No descent direction left: already at the minimum to working precision.
            return Ok(finish(p, cost, true, iter));
        };
        p = next;
        cost = next_cost;
        let small = (0..3).all(|k| delta[k].abs() <= opts.rel_tol * (p[k].abs() + opts.rel_tol));
        if small {
            return Ok(finish(p, cost, true, iter));
        }
    }
    Ok(finish(p, cost, false, opts.max_iter))
}
