//! PLS-DA: single-response PLS regression on a `{0, 1}` infection indicator,
//! computed NIPALS-style with deflation of both X and y.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::spec::PlsParams;
use super::{check_training_data, indicator};
use crate::error::Result;
use crate::spectrum::SampleLabel;

/// Components stop once the squared score norm falls below this.
pub const MIN_SCORE_NORM_SQ: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsModel {
    pub params: PlsParams,
    pub x_mean: Array1<f64>,
    pub y_mean: f64,
    /// a x d unit-norm weight vectors.
    pub weights: Array2<f64>,
    /// a x d X loadings.
    pub loadings: Array2<f64>,
    /// y loading per component.
    pub y_loadings: Vec<f64>,
}

impl PlsModel {
    /// Components actually extracted (may be fewer than requested).
    pub fn n_components(&self) -> usize {
        self.y_loadings.len()
    }

    /// Per-component scores of one row, deflating as in training.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let mut r = Array1::from(x.to_vec()) - &self.x_mean;
        let mut out = Vec::with_capacity(self.n_components());
        for a in 0..self.n_components() {
            let t = r.dot(&self.weights.row(a));
            r.scaled_add(-t, &self.loadings.row(a));
            out.push(t);
        }
        out
    }

    /// Regressed indicator `y_mean + sum(q_a t_a)`.
    pub fn response(&self, x: &[f64]) -> f64 {
        self.y_mean
            + self
                .scores(x)
                .iter()
                .zip(&self.y_loadings)
                .map(|(t, q)| t * q)
                .sum::<f64>()
    }
}

pub fn fit_plsda(x: &Array2<f64>, y: &[SampleLabel], params: &PlsParams) -> Result<PlsModel> {
    check_training_data(x, y, true)?;
    let d = x.ncols();
    let x_mean = x.mean_axis(Axis(0)).expect("non-empty");
    let yv = Array1::from(indicator(y));
    let y_mean = yv.mean().expect("non-empty");
    let mut xa = x - &x_mean;
    let mut ya = yv - y_mean;

    let mut weights = Vec::new();
    let mut loadings = Vec::new();
    let mut y_loadings = Vec::new();
    for _ in 0..params.n_components {
        let mut w = xa.t().dot(&ya);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            break;
        }
        w /= norm;
        let t = xa.dot(&w);
        let tt = t.dot(&t);
        if tt < MIN_SCORE_NORM_SQ {
            break;
        }
        let p = xa.t().dot(&t) / tt;
        let q = ya.dot(&t) / tt;
        for (mut row, &ti) in xa.rows_mut().into_iter().zip(&t) {
            row.scaled_add(-ti, &p);
        }
        ya.scaled_add(-q, &t);
        weights.push(w);
        loadings.push(p);
        y_loadings.push(q);
    }
    if y_loadings.len() < params.n_components {
        log::debug!(
            "PLS-DA: {} of {} components extracted",
            y_loadings.len(),
            params.n_components
        );
    }
    let stack = |rows: Vec<Array1<f64>>| {
        let a = rows.len();
        Array2::from_shape_vec((a, d), rows.into_iter().flatten().collect()).expect("rows of length d")
    };
    Ok(PlsModel {
        params: params.clone(),
        x_mean,
        y_mean,
        weights: stack(weights),
        loadings: stack(loadings),
        y_loadings,
    })
}
