//! The fitted transform chain from a raw spectrum to a label.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{pca_fit, select_top_k, FeatureConfig, FeatureMatrix, PcaModel, SelectionMask, SelectionMethod, Standardizer};
use crate::models::{fit, ClassifierModel, ClassifierSpec, TrainSeed};
use crate::preprocess::{run_pipeline, PreprocessConfig};
use crate::rng::derive_seed;
use crate::spectrum::{Axis, ImsSpectrum, SampleLabel};

/// Preprocesses every spectrum (in parallel) and stacks the flattened
/// results as rows, in input order.
pub fn preprocess_matrix(spectra: &[&ImsSpectrum], config: &PreprocessConfig) -> Result<Array2<f64>> {
    let processed: Vec<ImsSpectrum> = spectra
        .par_iter()
        .map(|s| run_pipeline(s, config))
        .collect::<Result<_>>()?;
    Ok(FeatureMatrix::from_spectra(&processed)?.values().clone())
}

/// Standardization followed by PCA, fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureChain {
    pub standardizer: Standardizer,
    pub pca: PcaModel,
}

impl FeatureChain {
    pub fn fit(x: &Array2<f64>, config: &FeatureConfig) -> Result<Self> {
        let standardizer = if config.standardize {
            Standardizer::fit(x)?
        } else {
            Standardizer::identity(x.ncols())
        };
        let pca = pca_fit(&standardizer.transform(x)?, config.n_components)?;
        Ok(FeatureChain { standardizer, pca })
    }

    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.pca.transform(&self.standardizer.transform(x)?)
    }
}

/// Optional supervised top-k column selection after PCA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub method: SelectionMethod,
    pub k: usize,
}

impl Selection {
    pub fn fit(selection: Option<Selection>, x: &Array2<f64>, y: &[SampleLabel], seed: u64) -> Result<SelectionMask> {
        match selection {
            None => Ok(SelectionMask::identity(x.ncols())),
            Some(s) => select_top_k(&FeatureMatrix::from_values(x.clone())?, y, s.k, s.method, TrainSeed(seed)),
        }
    }
}

/// Everything needed to classify one raw spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub preprocess: PreprocessConfig,
    pub drift_axis: Axis,
    pub retention_axis: Axis,
    pub chain: FeatureChain,
    pub mask: SelectionMask,
    pub model: ClassifierModel,
}

impl TrainedPipeline {
    /// Fits the full chain on `spectra`, which must share axes.
    pub fn train(
        spectra: &[&ImsSpectrum],
        labels: &[SampleLabel],
        preprocess: &PreprocessConfig,
        features: &FeatureConfig,
        spec: &ClassifierSpec,
        selection: Option<Selection>,
        seed: u64,
    ) -> Result<Self> {
        let first = spectra
            .first()
            .ok_or_else(|| Error::DegenerateData("no training spectra".into()))?;
        if let Some(odd) = spectra.iter().find(|s| !s.same_axes(first)) {
            return Err(Error::InvalidDataset(format!(
                "{} has axes different from {}",
                odd.sample_id(),
                first.sample_id()
            )));
        }
        if labels.len() != spectra.len() {
            return Err(Error::LengthMismatch(format!(
                "{} labels for {} spectra",
                labels.len(),
                spectra.len()
            )));
        }
        let raw = preprocess_matrix(spectra, preprocess)?;
        let chain = FeatureChain::fit(&raw, features)?;
        let z = chain.transform(&raw)?;
        let mask = Selection::fit(selection, &z, labels, derive_seed(seed, &[0]))?;
        let model = fit(&mask.apply_array(&z)?, labels, spec, TrainSeed(derive_seed(seed, &[1])))?;
        Ok(TrainedPipeline {
            preprocess: preprocess.clone(),
            drift_axis: first.drift_axis().clone(),
            retention_axis: first.retention_axis().clone(),
            chain,
            mask,
            model,
        })
    }

    fn check_axes(&self, s: &ImsSpectrum) -> Result<()> {
        let expected = self.retention_axis.count * self.drift_axis.count;
        let (rows, cols) = s.shape();
        if (rows, cols) != (self.retention_axis.count, self.drift_axis.count) {
            return Err(Error::DimensionMismatch {
                expected,
                found: rows * cols,
            });
        }
        if s.drift_axis() != &self.drift_axis || s.retention_axis() != &self.retention_axis {
            return Err(Error::InvalidSpectrum(format!(
                "{}: axis calibration differs from the training spectra",
                s.sample_id()
            )));
        }
        Ok(())
    }

    /// Label and decision score for each spectrum.
    pub fn predict(&self, spectra: &[&ImsSpectrum]) -> Result<Vec<(SampleLabel, f64)>> {
        for s in spectra {
            self.check_axes(s)?;
        }
        let raw = preprocess_matrix(spectra, &self.preprocess)?;
        let z = self.mask.apply_array(&self.chain.transform(&raw)?)?;
        let (labels, scores) = self.model.predict_with_scores(&z)?;
        Ok(labels.into_iter().zip(scores).collect())
    }

    pub fn predict_spectrum(&self, spectrum: &ImsSpectrum) -> Result<(SampleLabel, f64)> {
        Ok(self.predict(&[spectrum])?[0])
    }
}
