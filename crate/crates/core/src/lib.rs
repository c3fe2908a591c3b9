//! Infection screening from GC-IMS breath spectra.
//!
//! The crate covers the whole offline pipeline: reading and validating
//! spectra and their clinic records, per-spectrum preprocessing, feature
//! reduction (standardization, Gram-matrix PCA, supervised top-k selection),
//! five classical binary classifiers, stratified evaluation, and a seeded
//! generator of synthetic spectra for desk-scale experiments.
//!
//! Spectra are stored retention-major: one row per retention-time point,
//! one column per drift-time point.

pub mod container;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod linalg;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod render;
pub mod rng;
pub mod spectrum;
pub mod synth;

pub use error::{Error, Result};
pub use eval::{EvaluationReport, FoldPlan, MetricSet, SplitPlan};
pub use features::{FeatureMatrix, PcaModel, SelectionMask};
pub use models::{ClassifierKind, ClassifierModel, ClassifierSpec, TrainSeed};
pub use pipeline::TrainedPipeline;
pub use preprocess::{PreprocessConfig, Step};
pub use spectrum::{Axis, AxisKind, Dataset, ImsSpectrum, SampleLabel, SampleRecord};
pub use synth::SynthConfig;
