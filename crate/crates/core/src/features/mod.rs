//! From preprocessed spectra to a reduced feature matrix: flatten,
//! standardize, PCA, then supervised top-k selection.

mod pca;
mod select;
mod standardize;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::spectrum::ImsSpectrum;

pub use pca::{pca_fit, pca_transform, PcaModel, RANK_TOLERANCE};
pub use select::{select_top_k, SelectionMask, SelectionMethod};
pub use standardize::{standardize_fit_transform, Standardizer};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    feature_names: Vec<String>,
    sample_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>, feature_names: Vec<String>, sample_ids: Vec<String>) -> Result<Self> {
        let (n, d) = values.dim();
        if feature_names.len() != d || sample_ids.len() != n {
            return Err(Error::LengthMismatch(format!(
                "{n}x{d} values with {} names and {} ids",
                feature_names.len(),
                sample_ids.len()
            )));
        }
        if let Some(((r, c), v)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::DegenerateData(format!("non-finite value {v} at ({r}, {c})")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::DegenerateData(format!("duplicate feature name {dup}")));
        }
        Ok(FeatureMatrix {
            values,
            feature_names,
            sample_ids,
        })
    }

    /// Names `f0, f1, ...` and ids `s0, s1, ...`.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        let (n, d) = values.dim();
        FeatureMatrix::new(
            values,
            (0..d).map(|i| format!("f{i}")).collect(),
            (0..n).map(|i| format!("s{i}")).collect(),
        )
    }

    /// One row per spectrum, row-major flattened intensities. All spectra
    /// must share a shape.
    pub fn from_spectra<'a>(spectra: impl IntoIterator<Item = &'a ImsSpectrum>) -> Result<Self> {
        let spectra: Vec<&ImsSpectrum> = spectra.into_iter().collect();
        let first = spectra
            .first()
            .ok_or_else(|| Error::DegenerateData("no spectra".into()))?;
        let (rows, cols) = first.shape();
        let d = rows * cols;
        let mut values = Array2::zeros((spectra.len(), d));
        for (i, s) in spectra.iter().enumerate() {
            if s.shape() != (rows, cols) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.shape().0 * s.shape().1,
                });
            }
            values
                .row_mut(i)
                .iter_mut()
                .zip(s.intensity().iter())
                .for_each(|(dst, &v)| *dst = v);
        }
        let names = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| format!("r{r}c{c}")))
            .collect();
        let ids = spectra.iter().map(|s| s.sample_id().to_string()).collect();
        FeatureMatrix::new(values, names, ids)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(ndarray::Axis(0), rows),
            feature_names: self.feature_names.clone(),
            sample_ids: rows.iter().map(|&r| self.sample_ids[r].clone()).collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(ndarray::Axis(1), cols),
            feature_names: cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            sample_ids: self.sample_ids.clone(),
        }
    }
}

/// How the reduced feature set is built before per-algorithm selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub standardize: bool,
    /// Requested PCA components; clamped to the rank of the training data.
    pub n_components: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            standardize: true,
            n_components: 304,
        }
    }
}
