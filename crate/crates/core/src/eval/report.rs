use std::collections::BTreeMap;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use super::grid::{grid_search, CellResult};
use super::metrics::{compute_metrics, MetricSet};
use super::split::{stratified_kfold, stratified_split, SplitPlan};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, SelectionMethod};
use crate::models::{fit, ClassifierKind, ClassifierSpec, TrainSeed};
use crate::pipeline::{preprocess_matrix, FeatureChain, Selection};
use crate::preprocess::PreprocessConfig;
use crate::rng::derive_seed;
use crate::spectrum::{Dataset, SampleLabel};

/// One algorithm to evaluate: its grid and optional feature selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmPlan {
    pub kind: ClassifierKind,
    pub grid: Vec<ClassifierSpec>,
    pub selection: Option<Selection>,
}

impl AlgorithmPlan {
    /// Default grid with the per-algorithm selection: top 100 by forest
    /// importance for the tree and the forest, top 84 by logistic weight
    /// for logistic regression, none for SVM and PLS-DA. `k_override`
    /// replaces k everywhere; algorithms without a default selector then
    /// use importance.
    pub fn standard(kind: ClassifierKind, k_override: Option<usize>) -> Self {
        let default = match kind {
            ClassifierKind::DecisionTree | ClassifierKind::RandomForest => {
                Some((SelectionMethod::Importance, 100))
            }
            ClassifierKind::LogisticRegression => Some((SelectionMethod::AbsWeight, 84)),
            ClassifierKind::Svm | ClassifierKind::PlsDa => None,
        };
        let selection = match (default, k_override) {
            (Some((method, _)), Some(k)) => Some(Selection { method, k }),
            (None, Some(k)) => Some(Selection { method: SelectionMethod::Importance, k }),
            (Some((method, k)), None) => Some(Selection { method, k }),
            (None, None) => None,
        };
        AlgorithmPlan {
            kind,
            grid: ClassifierSpec::default_grid(kind),
            selection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub test_fraction: f64,
    pub cv_folds: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            test_fraction: 0.2,
            cv_folds: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub algorithm: ClassifierKind,
    /// The selected grid cell, refitted on the whole training portion.
    pub spec: ClassifierSpec,
    pub hyperparameters: BTreeMap<String, String>,
    pub cv_mean_accuracy: f64,
    pub cv_std: f64,
    /// Held-out metrics of the refitted model.
    pub test: MetricSet,
    pub selection: Option<Selection>,
    /// Columns the classifier saw.
    pub n_features: usize,
    pub model_seed: u64,
    pub cv_table: Vec<CellResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub seed: u64,
    pub n_samples: usize,
    pub n_infected: usize,
    pub preprocess: PreprocessConfig,
    pub features: FeatureConfig,
    pub options: EvalOptions,
    /// Components actually kept (the request is clamped to the data rank).
    pub pca_components: usize,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub rows: Vec<ReportRow>,
}

const CSV_HEADER: [&str; 21] = [
    "algorithm",
    "cv_mean_accuracy",
    "cv_std",
    "test_accuracy",
    "precision",
    "recall",
    "f1",
    "roc_auc",
    "tp",
    "fp",
    "tn",
    "fn",
    "n_features",
    "selection",
    "hyperparameters",
    "model_seed",
    "seed",
    "test_fraction",
    "cv_folds",
    "pca_components",
    "preprocess",
];

impl EvaluationReport {
    pub fn row(&self, kind: ClassifierKind) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.algorithm == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("report JSON: {e}")))
    }

    /// One line per algorithm; the run configuration is repeated on every
    /// line so any row can be replayed alone.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        let preprocess = self
            .preprocess
            .steps
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        for r in &self.rows {
            let t = &r.test;
            let hyper = r
                .hyperparameters
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" ");
            let selection = r
                .selection
                .map(|s| format!("{}:{}", s.method.as_str(), s.k))
                .unwrap_or_else(|| "none".into());
            w.write_record([
                r.algorithm.to_string(),
                r.cv_mean_accuracy.to_string(),
                r.cv_std.to_string(),
                t.accuracy.to_string(),
                t.precision.to_string(),
                t.recall.to_string(),
                t.f1.to_string(),
                t.roc_auc.map(|a| a.to_string()).unwrap_or_default(),
                t.tp.to_string(),
                t.fp.to_string(),
                t.tn.to_string(),
                t.fn_.to_string(),
                r.n_features.to_string(),
                selection,
                hyper,
                r.model_seed.to_string(),
                self.seed.to_string(),
                self.options.test_fraction.to_string(),
                self.options.cv_folds.to_string(),
                self.pca_components.to_string(),
                preprocess.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Runs the whole comparison.
///
/// One stratified split is shared by every algorithm. Standardization and
/// PCA are fitted on the training portion only. Each algorithm is tuned by
/// stratified k-fold grid search on the training portion (selection refitted
/// per fold), refitted on the full training portion with its best cell and
/// scored on the held-out part. Rows follow the order of `plans`.
pub fn evaluate_all(
    dataset: &Dataset,
    preprocess: &PreprocessConfig,
    features: &FeatureConfig,
    plans: &[AlgorithmPlan],
    options: &EvalOptions,
    seed: u64,
) -> Result<EvaluationReport> {
    let labels = dataset.labels()?;
    if plans.is_empty() {
        return Err(Error::config("no algorithms requested"));
    }
    for p in plans {
        for spec in &p.grid {
            spec.check()?;
        }
    }
    let split = stratified_split(&labels, options.test_fraction, derive_seed(seed, &[1]))?;
    let SplitPlan {
        train_indices: train,
        test_indices: test,
    } = &split;
    let pick = |idx: &[usize]| -> Vec<SampleLabel> { idx.iter().map(|&i| labels[i]).collect() };
    let (y_train, y_test) = (pick(train), pick(test));
    // every validation fold should see both classes
    let smallest = y_train.iter().filter(|l| l.is_infected()).count().min(
        y_train.iter().filter(|l| !l.is_infected()).count(),
    );
    if options.cv_folds > smallest {
        return Err(Error::KTooLarge {
            k: options.cv_folds,
            n: smallest,
        });
    }
    let folds = stratified_kfold(&y_train, options.cv_folds, derive_seed(seed, &[2]))?;

    let spectra: Vec<_> = dataset.ordered_spectra().collect();
    let raw = preprocess_matrix(&spectra, preprocess)?;
    let raw_train = raw.select(Axis(0), train);
    let chain = FeatureChain::fit(&raw_train, features)?;
    let z_train = chain.transform(&raw_train)?;
    let z_test = chain.transform(&raw.select(Axis(0), test))?;
    log::info!(
        "{} train / {} test samples, {} PCA components",
        train.len(),
        test.len(),
        chain.pca.n_components()
    );

    let mut rows = Vec::with_capacity(plans.len());
    for plan in plans {
        let algo_seed = derive_seed(seed, &[3, plan.kind.tag() as u64]);
        let grid = grid_search(&z_train, &y_train, &plan.grid, &folds, plan.selection, algo_seed)?;
        let best = grid.best_cell().clone();

        let final_seed = derive_seed(algo_seed, &[2]);
        let mask = Selection::fit(plan.selection, &z_train, &y_train, derive_seed(final_seed, &[0]))?;
        let model_seed = derive_seed(final_seed, &[1]);
        let model = fit(&mask.apply_array(&z_train)?, &y_train, &best.spec, TrainSeed(model_seed))?;
        let (pred, scores) = model.predict_with_scores(&mask.apply_array(&z_test)?)?;
        let metrics = compute_metrics(&pred, &scores, &y_test)?;
        log::info!(
            "{}: cv {:.3} test {:.3} ({})",
            plan.kind,
            best.mean_accuracy,
            metrics.accuracy,
            best.spec
        );
        rows.push(ReportRow {
            algorithm: plan.kind,
            hyperparameters: best.spec.to_pairs().into_iter().collect(),
            spec: best.spec,
            cv_mean_accuracy: best.mean_accuracy,
            cv_std: best.std_accuracy,
            test: metrics,
            selection: plan.selection,
            n_features: mask.len(),
            model_seed,
            cv_table: grid.cells,
        });
    }

    let ids = |idx: &[usize]| idx.iter().map(|&i| dataset.records()[i].sample_id.clone()).collect();
    Ok(EvaluationReport {
        seed,
        n_samples: labels.len(),
        n_infected: labels.iter().filter(|l| l.is_infected()).count(),
        preprocess: preprocess.clone(),
        features: features.clone(),
        options: options.clone(),
        pca_components: chain.pca.n_components(),
        train_ids: ids(train),
        test_ids: ids(test),
        rows,
    })
}
