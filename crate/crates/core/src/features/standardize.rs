use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Column means and population standard deviations. Zero-variance columns
/// record a std of 1 so they map to zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Array1<f64>,
    pub stds: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: &Array2<f64>) -> Result<Self> {
        let n = x.nrows();
        if n < 2 {
            return Err(Error::DegenerateData(format!("standardizing {n} samples")));
        }
        let mut means = Array1::zeros(x.ncols());
        let mut stds = Array1::ones(x.ncols());
        for (j, col) in x.axis_iter(Axis(1)).enumerate() {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                means[j] = first;
                continue;
            }
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            means[j] = mean;
            if var > 0.0 {
                stds[j] = var.sqrt();
            }
        }
        Ok(Standardizer { means, stds })
    }

    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                found: x.ncols(),
            });
        }
        Ok((x - &self.means) / &self.stds)
    }

    /// Identity transform for `d` columns.
    pub fn identity(d: usize) -> Self {
        Standardizer {
            means: Array1::zeros(d),
            stds: Array1::ones(d),
        }
    }
}

pub fn standardize_fit_transform(x: &FeatureMatrix) -> Result<(FeatureMatrix, Standardizer)> {
    let scaler = Standardizer::fit(x.values())?;
    let values = scaler.transform(x.values())?;
    let out = FeatureMatrix::new(values, x.feature_names().to_vec(), x.sample_ids().to_vec())?;
    Ok((out, scaler))
}
