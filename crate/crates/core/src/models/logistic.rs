//! Binary logistic regression by full-batch gradient descent on the mean
//! cross-entropy. L2 adds `lambda/2 * |w|^2`; L1 adds `lambda * |w|_1` and is
//! handled with a soft-threshold (proximal) step. The intercept is never
//! penalized.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::spec::{LogisticParams, Penalty};
use super::{check_training_data, indicator};
use crate::error::Result;
use crate::linalg::dot;
use crate::spectrum::SampleLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub params: LogisticParams,
    pub weights: Array1<f64>,
    pub intercept: f64,
    pub iterations: usize,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(self.weights.as_slice().unwrap(), x) + self.intercept)
    }
}

/// Mean cross-entropy of `(w, b)` on the data, without penalty.
pub fn cross_entropy(x: &Array2<f64>, y: &[f64], w: &Array1<f64>, b: f64) -> f64 {
    let z = x.dot(w) + b;
    z.iter()
        .zip(y)
        .map(|(&z, &t)| {
            // log(1 + e^z) - t z, stable for large |z|
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - t * z
        })
        .sum::<f64>()
        / y.len() as f64
}

/// Largest singular value squared, by power iteration from a fixed start.
fn spectral_norm_sq(x: &Array2<f64>) -> f64 {
    let d = x.ncols();
    let mut v = Array1::from_elem(d, 1.0 / (d as f64).sqrt());
    let mut estimate = 0.0;
    for _ in 0..100 {
        let w = x.t().dot(&x.dot(&v));
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w / norm;
        if (next - estimate).abs() <= 1e-10 * next {
            return next;
        }
        estimate = next;
    }
    estimate
}

pub fn fit_logistic(x: &Array2<f64>, y: &[SampleLabel], params: &LogisticParams) -> Result<LogisticModel> {
    check_training_data(x, y, true)?;
    let n = x.nrows() as f64;
    let t = Array1::from(indicator(y));

    // Lipschitz constant of the smooth part, with a 1.0 row of ones for the
    // intercept folded into the bound.
    let l2_term = if params.penalty == Penalty::L2 { params.lambda } else { 0.0 };
    let lipschitz = 0.25 * (spectral_norm_sq(x) + n) / n + l2_term;
    let step = params.learning_rate.min(1.0 / lipschitz);

    let mut w = Array1::<f64>::zeros(x.ncols());
    let mut b = 0.0;
    let mut iterations = 0;
    for it in 0..params.max_iters {
        iterations = it + 1;
        let p = (x.dot(&w) + b).mapv(sigmoid);
        let r = &p - &t;
        let mut grad_w = x.t().dot(&r) / n;
        let grad_b = r.sum() / n;
        match params.penalty {
            Penalty::L2 => grad_w.scaled_add(params.lambda, &w),
            Penalty::None | Penalty::L1 => {}
        }
        let norm = match params.penalty {
            Penalty::L1 => {
                let shrink = step * params.lambda;
                let next = (&w - &(step * &grad_w)).mapv(|v| v.signum() * (v.abs() - shrink).max(0.0));
                let moved = (&w - &next) / step;
                w = next;
                b -= step * grad_b;
                (moved.dot(&moved) + grad_b * grad_b).sqrt()
            }
            _ => {
                let norm = (grad_w.dot(&grad_w) + grad_b * grad_b).sqrt();
                if norm < params.tol {
                    break;
                }
                w.scaled_add(-step, &grad_w);
                b -= step * grad_b;
                norm
            }
        };
        if norm < params.tol {
            break;
        }
    }
    Ok(LogisticModel {
        params: params.clone(),
        weights: w,
        intercept: b,
        iterations,
    })
}
