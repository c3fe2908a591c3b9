//! PCA through the eigendecomposition of the n x n Gram matrix of centered
//! rows. With n samples far fewer than features this avoids ever forming the
//! d x d covariance.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Gram eigenvalues at or below this fraction of the largest count as zero
/// when determining rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// k x d, orthonormal rows.
    pub components: Array2<f64>,
    /// Sample variance (n - 1 denominator) of each component's scores.
    pub explained_variance: Array1<f64>,
    pub explained_variance_ratio: Array1<f64>,
    pub requested_components: usize,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.components.ncols()
    }

    /// True when fewer components were kept than requested.
    pub fn was_clamped(&self) -> bool {
        self.n_components() < self.requested_components
    }

    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        Ok((x - &self.mean).dot(&self.components.t()))
    }
}

pub fn pca_fit(x: &Array2<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::DegenerateData(format!("PCA on {n} samples")));
    }
    if k == 0 {
        return Err(Error::config("PCA needs at least one component"));
    }
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let centered = x - &mean;
    let gram = centered.dot(&centered.t());
    let eig = symmetric_eigen(&gram);

    let largest = eig.values[0];
    let rank = if largest > 0.0 {
        eig.values
            .iter()
            .take_while(|&&v| v > RANK_TOLERANCE * largest)
            .count()
    } else {
        0
    };
    if rank == 0 {
        return Err(Error::DegenerateData("all rows identical".into()));
    }
    let kept = k.min(rank);
    if kept < k {
        log::info!("PCA: {k} components requested, data rank {rank}; keeping {kept}");
    }

    let total: f64 = (0..n).map(|i| gram[[i, i]]).sum();
    let mut components = Array2::zeros((kept, d));
    for a in 0..kept {
        let u = eig.vectors.column(a);
        let mut v = centered.t().dot(&u) / eig.values[a].sqrt();
        // largest-magnitude entry positive (first one on ties)
        let pivot = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &x)| if x.abs() > best.1.abs() { (i, x) } else { best });
        if pivot.1 < 0.0 {
            v.mapv_inplace(|x| -x);
        }
        components.row_mut(a).assign(&v);
    }
    let eigvals = eig.values.slice(ndarray::s![..kept]);
    Ok(PcaModel {
        mean,
        components,
        explained_variance: eigvals.mapv(|l| l / (n - 1) as f64),
        explained_variance_ratio: eigvals.mapv(|l| l / total),
        requested_components: k,
    })
}

/// Scores `(X - mean) * components^T`, columns named `PC1`, `PC2`, ...
pub fn pca_transform(model: &PcaModel, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    let scores = model.transform(x.values())?;
    let names = (1..=model.n_components()).map(|i| format!("PC{i}")).collect();
    FeatureMatrix::new(scores, names, x.sample_ids().to_vec())
}
