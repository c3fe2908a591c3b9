//! Spectrum and dataset data model.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Ion transit time through the drift tube, in milliseconds.
    DriftTime,
    /// Compound transit time through the GC column, in seconds.
    RetentionTime,
}

/// A uniformly sampled axis: value `i` is `start + i * step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisKind,
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: AxisKind, start: f64, step: f64, count: usize) -> Result<Self> {
        let axis = Axis {
            name,
            start,
            step,
            count,
        };
        axis.check()?;
        Ok(axis)
    }

    pub fn check(&self) -> Result<()> {
        if !self.start.is_finite() || !self.step.is_finite() || self.step <= 0.0 {
            return Err(Error::InvalidAxis(format!(
                "{:?}: start {} step {} (step must be finite and positive)",
                self.name, self.start, self.step
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidAxis(format!(
                "{:?}: count {} < 2",
                self.name, self.count
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    /// Implied values strictly increase; fails only when `step` underflows
    /// against a huge `start`.
    pub fn is_monotonic(&self) -> bool {
        (1..self.count).all(|i| self.value(i) > self.value(i - 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleLabel {
    NotInfected,
    Infected,
}

impl SampleLabel {
    pub fn is_infected(self) -> bool {
        self == SampleLabel::Infected
    }

    pub fn from_infected(infected: bool) -> Self {
        if infected {
            SampleLabel::Infected
        } else {
            SampleLabel::NotInfected
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SampleLabel::NotInfected => "not_infected",
            SampleLabel::Infected => "infected",
        }
    }
}

impl fmt::Display for SampleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SampleLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "infected" | "infection" | "1" => Ok(SampleLabel::Infected),
            "not_infected" | "no_infection" | "0" => Ok(SampleLabel::NotInfected),
            other => Err(Error::config(format!("unknown label {other:?}"))),
        }
    }
}

/// One GC-IMS measurement. Rows follow the retention axis, columns the drift
/// axis; intensities are held at 64-bit precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ImsSpectrum {
    sample_id: String,
    drift_axis: Axis,
    retention_axis: Axis,
    intensity: Array2<f64>,
    label: Option<SampleLabel>,
}

impl ImsSpectrum {
    /// Builds a spectrum, checking axes and that the matrix is
    /// `retention.count x drift.count`. Finiteness is left to measurement
    /// validation so that corrupt files can still be reported on.
    pub fn new(
        sample_id: impl Into<String>,
        drift_axis: Axis,
        retention_axis: Axis,
        intensity: Array2<f64>,
    ) -> Result<Self> {
        drift_axis.check()?;
        retention_axis.check()?;
        if drift_axis.name != AxisKind::DriftTime || retention_axis.name != AxisKind::RetentionTime
        {
            return Err(Error::InvalidAxis("axis kinds swapped".into()));
        }
        let expected = (retention_axis.count, drift_axis.count);
        if intensity.dim() != expected {
            return Err(Error::InvalidSpectrum(format!(
                "intensity is {:?}, axes imply {:?}",
                intensity.dim(),
                expected
            )));
        }
        Ok(ImsSpectrum {
            sample_id: sample_id.into(),
            drift_axis,
            retention_axis,
            intensity,
            label: None,
        })
    }

    pub fn with_label(mut self, label: Option<SampleLabel>) -> Self {
        self.label = label;
        self
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn drift_axis(&self) -> &Axis {
        &self.drift_axis
    }

    pub fn retention_axis(&self) -> &Axis {
        &self.retention_axis
    }

    pub fn intensity(&self) -> &Array2<f64> {
        &self.intensity
    }

    pub fn label(&self) -> Option<SampleLabel> {
        self.label
    }

    /// `(rows, cols)` = (retention points, drift points).
    pub fn shape(&self) -> (usize, usize) {
        (self.retention_axis.count, self.drift_axis.count)
    }

    /// Row-major copy of the intensities.
    pub fn flatten(&self) -> Vec<f64> {
        self.intensity.iter().copied().collect()
    }

    /// Inverse of [`flatten`](Self::flatten) against this spectrum's axes.
    pub fn reshape(&self, values: Vec<f64>) -> Result<Self> {
        let intensity = Array2::from_shape_vec(self.shape(), values)
            .map_err(|e| Error::InvalidSpectrum(e.to_string()))?;
        Ok(ImsSpectrum {
            intensity,
            ..self.clone()
        })
    }

    /// Same metadata, new intensities; shape must match the axes.
    pub(crate) fn with_intensity(&self, intensity: Array2<f64>) -> Self {
        debug_assert_eq!(intensity.dim(), self.shape());
        ImsSpectrum {
            intensity,
            ..self.clone()
        }
    }

    pub(crate) fn replace_axes(
        &self,
        drift_axis: Axis,
        retention_axis: Axis,
        intensity: Array2<f64>,
    ) -> Result<Self> {
        ImsSpectrum::new(self.sample_id.clone(), drift_axis, retention_axis, intensity)
            .map(|s| s.with_label(self.label))
    }

    pub fn same_axes(&self, other: &ImsSpectrum) -> bool {
        self.drift_axis == other.drift_axis && self.retention_axis == other.retention_axis
    }
}

/// Free-function form of [`ImsSpectrum::shape`].
pub fn spectrum_shape(spectrum: &ImsSpectrum) -> (usize, usize) {
    spectrum.shape()
}

pub fn flatten(spectrum: &ImsSpectrum) -> Vec<f64> {
    spectrum.flatten()
}

/// Clinic record attached to a measurement. `sex` and `collected_on` are kept
/// as raw text so that validation can report on malformed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub age: i64,
    pub sex: String,
    pub site: String,
    pub collected_on: String,
    pub label: Option<SampleLabel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<SampleRecord>,
    spectra: BTreeMap<String, ImsSpectrum>,
}

impl Dataset {
    pub fn new(records: Vec<SampleRecord>, spectra: BTreeMap<String, ImsSpectrum>) -> Result<Self> {
        let mut seen = HashSet::new();
        for record in &records {
            if !seen.insert(record.sample_id.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate sample_id {}",
                    record.sample_id
                )));
            }
            if !spectra.contains_key(&record.sample_id) {
                return Err(Error::InvalidDataset(format!(
                    "record {} has no spectrum",
                    record.sample_id
                )));
            }
        }
        let mut iter = spectra.values();
        if let Some(first) = iter.next() {
            if let Some(other) = iter.find(|s| !s.same_axes(first)) {
                return Err(Error::InvalidDataset(format!(
                    "spectra {} and {} have different axes",
                    first.sample_id(),
                    other.sample_id()
                )));
            }
        }
        Ok(Dataset { records, spectra })
    }

    pub fn records(&self) -> &[SampleRecord] {
        &self.records
    }

    pub fn spectra(&self) -> &BTreeMap<String, ImsSpectrum> {
        &self.spectra
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn spectrum(&self, sample_id: &str) -> Option<&ImsSpectrum> {
        self.spectra.get(sample_id)
    }

    /// Spectra in record order.
    pub fn ordered_spectra(&self) -> impl Iterator<Item = &ImsSpectrum> {
        self.records.iter().map(|r| &self.spectra[&r.sample_id])
    }

    /// Record labels in order, failing if any is missing.
    pub fn labels(&self) -> Result<Vec<SampleLabel>> {
        let missing = self.records.iter().filter(|r| r.label.is_none()).count();
        if missing > 0 {
            return Err(Error::UnlabeledSamples(missing));
        }
        Ok(self.records.iter().filter_map(|r| r.label).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn axes(rows: usize, cols: usize) -> (Axis, Axis) {
        (
            Axis::new(AxisKind::DriftTime, 5.0, 0.02, cols).unwrap(),
            Axis::new(AxisKind::RetentionTime, 0.0, 2.0, rows).unwrap(),
        )
    }

    fn spec(rows: usize, cols: usize, values: Vec<f64>) -> ImsSpectrum {
        let (d, r) = axes(rows, cols);
        ImsSpectrum::new("s", d, r, Array2::from_shape_vec((rows, cols), values).unwrap()).unwrap()
    }

    #[test]
    fn axis_rejects_short_or_nonpositive() {
        assert!(Axis::new(AxisKind::DriftTime, 0.0, 1.0, 1).is_err());
        assert!(Axis::new(AxisKind::DriftTime, 0.0, 0.0, 4).is_err());
        assert!(Axis::new(AxisKind::DriftTime, 0.0, -1.0, 4).is_err());
        assert!(Axis::new(AxisKind::DriftTime, 0.0, 1.0, 2).unwrap().is_monotonic());
    }

    #[test]
    fn shape_is_retention_by_drift() {
        let (d, r) = axes(3150, 4080);
        let s = ImsSpectrum::new("big", d, r, Array2::zeros((3150, 4080))).unwrap();
        assert_eq!(spectrum_shape(&s), (3150, 4080));
        let (d, r) = axes(3, 5);
        assert!(ImsSpectrum::new("bad", d, r, Array2::zeros((5, 3))).is_err());
    }

    #[test]
    fn flatten_row_major() {
        let s = spec(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.intensity(), &array![[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(flatten(&s), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(flatten(&spec(3, 3, vec![0.0; 9])), vec![0.0; 9]);
    }

    proptest! {
        #[test]
        fn flatten_reshape_roundtrip(rows in 2usize..12, cols in 2usize..12, seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = crate::rng::rng_from(seed, &[]);
            let values: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>() * 1e3 - 5e2).collect();
            let s = spec(rows, cols, values.clone());
            let back = s.reshape(s.flatten()).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(back.flatten(), values);
        }
    }

    #[test]
    fn dataset_rejects_missing_spectrum_and_axis_mismatch() {
        let rec = |id: &str| SampleRecord {
            sample_id: id.into(),
            age: 40,
            sex: "male".into(),
            site: "a".into(),
            collected_on: "2024-01-01".into(),
            label: Some(SampleLabel::Infected),
        };
        let a = spec(2, 2, vec![0.0; 4]);
        let mut map = BTreeMap::new();
        map.insert("a".to_string(), a.clone());
        assert!(Dataset::new(vec![rec("a"), rec("b")], map.clone()).is_err());
        assert!(Dataset::new(vec![rec("a"), rec("a")], map.clone()).is_err());

        let (d, r) = axes(3, 2);
        let b = ImsSpectrum::new("b", d, r, Array2::zeros((3, 2))).unwrap();
        map.insert("b".to_string(), b);
        assert!(Dataset::new(vec![rec("a"), rec("b")], map).is_err());
    }
}
