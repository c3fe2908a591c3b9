//! Support vector classifiers with labels coded NotInfected = -1,
//! Infected = +1.
//!
//! Linear kernel: deterministic full-batch subgradient descent on
//! `lambda/2 |w|^2 + mean(hinge)` with `lambda = 1 / (C n)` (the usual
//! `1/2 |w|^2 + C sum(hinge)` objective divided by `C n`), step `1/(lambda t)`
//! and projection onto the ball of radius `1/sqrt(lambda)`. The intercept is
//! an extra weight on a constant input. The iterate with the lowest objective
//! is kept.
//!
//! Polynomial kernel: dual coordinate ascent over maximal violating pairs, as
//! in SMO, with kernel `(gamma x.x' + coef0)^degree`.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::spec::{Gamma, KernelKind, SvmParams};
use super::{check_training_data, TrainSeed};
use crate::error::Result;
use crate::linalg::dot;
use crate::spectrum::SampleLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SvmFit {
    Linear {
        weights: Array1<f64>,
        intercept: f64,
    },
    Poly {
        support_vectors: Array2<f64>,
        /// `alpha_i * y_i` per support vector.
        dual_coef: Vec<f64>,
        intercept: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    /// Gamma actually used (resolved when the spec says `scale`).
    pub gamma: f64,
    pub n_features: usize,
    pub fit: SvmFit,
    pub iterations: usize,
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn kernel(&self, a: &[f64], b: &[f64]) -> f64 {
        poly_kernel(a, b, self.gamma, self.params.coef0, self.params.degree)
    }

    /// Signed distance-like score; positive means Infected.
    pub fn margin(&self, x: &[f64]) -> f64 {
        match &self.fit {
            SvmFit::Linear { weights, intercept } => dot(weights.as_slice().unwrap(), x) + intercept,
            SvmFit::Poly {
                support_vectors,
                dual_coef,
                intercept,
            } => {
                support_vectors
                    .rows()
                    .into_iter()
                    .zip(dual_coef)
                    .map(|(sv, c)| c * self.kernel(sv.as_slice().unwrap(), x))
                    .sum::<f64>()
                    + intercept
            }
        }
    }
}

fn poly_kernel(a: &[f64], b: &[f64], gamma: f64, coef0: f64, degree: u32) -> f64 {
    (gamma * dot(a, b) + coef0).powi(degree as i32)
}

fn resolve_gamma(gamma: Gamma, x: &Array2<f64>) -> f64 {
    match gamma {
        Gamma::Fixed(g) => g,
        Gamma::Scale => {
            let n = x.len() as f64;
            let mean = x.sum() / n;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                1.0 / (x.ncols() as f64 * var)
            } else {
                1.0
            }
        }
    }
}

fn signs(y: &[SampleLabel]) -> Vec<f64> {
    y.iter().map(|l| if l.is_infected() { 1.0 } else { -1.0 }).collect()
}

/// `seed` is accepted for contract uniformity; both solvers are deterministic.
pub fn fit_svm(x: &Array2<f64>, y: &[SampleLabel], params: &SvmParams, _seed: TrainSeed) -> Result<SvmModel> {
    check_training_data(x, y, true)?;
    let x = &x.as_standard_layout().into_owned();
    let s = signs(y);
    let gamma = resolve_gamma(params.gamma, x);
    let (fit, iterations) = match params.kernel {
        KernelKind::Linear => fit_linear(x, &s, params),
        KernelKind::Poly => fit_dual(x, &s, params, gamma),
    };
    Ok(SvmModel {
        params: params.clone(),
        gamma,
        n_features: x.ncols(),
        fit,
        iterations,
    })
}

fn fit_linear(x: &Array2<f64>, s: &[f64], params: &SvmParams) -> (SvmFit, usize) {
    let (n, d) = x.dim();
    let lambda = 1.0 / (params.c * n as f64);
    let radius = 1.0 / lambda.sqrt();
    // weights followed by the intercept
    let mut w = vec![0.0; d + 1];
    let objective = |w: &[f64]| -> f64 {
        let reg = 0.5 * lambda * dot(w, w);
        let hinge: f64 = x
            .rows()
            .into_iter()
            .zip(s)
            .map(|(row, &yi)| (1.0 - yi * (dot(&w[..d], row.as_slice().unwrap()) + w[d])).max(0.0))
            .sum();
        reg + hinge / n as f64
    };
    let mut best = (objective(&w), w.clone());
    let mut iterations = 0;
    for t in 1..=params.max_iters {
        iterations = t;
        let mut g: Vec<f64> = w.iter().map(|v| lambda * v).collect();
        for (row, &yi) in x.rows().into_iter().zip(s) {
            let row = row.as_slice().unwrap();
            if yi * (dot(&w[..d], row) + w[d]) < 1.0 {
                for (gj, xj) in g[..d].iter_mut().zip(row) {
                    *gj -= yi * xj / n as f64;
                }
                g[d] -= yi / n as f64;
            }
        }
        if dot(&g, &g).sqrt() < params.tol {
            break;
        }
        let eta = 1.0 / (lambda * t as f64);
        for (wj, gj) in w.iter_mut().zip(&g) {
            *wj -= eta * gj;
        }
        let norm = dot(&w, &w).sqrt();
        if norm > radius {
            w.iter_mut().for_each(|v| *v *= radius / norm);
        }
        let obj = objective(&w);
        if obj < best.0 {
            best = (obj, w.clone());
        }
    }
    let w = best.1;
    (
        SvmFit::Linear {
            weights: Array1::from(w[..d].to_vec()),
            intercept: w[d],
        },
        iterations,
    )
}

fn fit_dual(x: &Array2<f64>, s: &[f64], params: &SvmParams, gamma: f64) -> (SvmFit, usize) {
    const TAU: f64 = 1e-12;
    let n = x.nrows();
    let c = params.c;
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let q = Array2::from_shape_fn((n, n), |(i, j)| {
        s[i] * s[j] * poly_kernel(&rows[i], &rows[j], gamma, params.coef0, params.degree)
    });
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut iterations = 0;
    while iterations < params.max_iters {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            let v = -s[t] * grad[t];
            if in_up(alpha[t], s[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], s[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < params.tol {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if s[i] != s[j] {
            let quad = (q[[i, i]] + q[[j, j]] + 2.0 * q[[i, j]]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q[[i, i]] + q[[j, j]] - 2.0 * q[[i, j]]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for k in 0..n {
            grad[k] += q[[i, k]] * di + q[[j, k]] * dj;
        }
    }

    // offset from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut free_sum) = (0usize, 0.0);
    for t in 0..n {
        let yg = s[t] * grad[t];
        if alpha[t] >= c {
            if s[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if s[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };

    let support: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let support_vectors = x.select(ndarray::Axis(0), &support);
    let dual_coef = support.iter().map(|&t| alpha[t] * s[t]).collect();
    (
        SvmFit::Poly {
            support_vectors,
            dual_coef,
            intercept: -rho,
        },
        iterations,
    )
}
