//! The five classifiers behind one fit / predict / decision-score contract.
//!
//! Labels are binary with [`SampleLabel::Infected`] as the positive class;
//! every decision score grows with the likelihood of infection. All ties in
//! votes and argmaxes resolve to [`SampleLabel::NotInfected`].

mod forest;
mod logistic;
mod plsda;
mod spec;
mod svm;
mod tree;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::SampleLabel;

pub use forest::{fit_forest, ForestModel};
pub use logistic::{cross_entropy, fit_logistic, sigmoid, LogisticModel};
pub use plsda::{fit_plsda, PlsModel, MIN_SCORE_NORM_SQ};
pub use spec::{
    ClassifierKind, ClassifierSpec, FeaturesPerSplit, ForestParams, Gamma, KernelKind,
    LogisticParams, Penalty, PlsParams, SvmParams, TreeParams,
};
pub use svm::{fit_svm, SvmFit, SvmModel};
pub use tree::{fit_tree, gini_impurity, Node, Tree, TreeModel};

/// Master seed for every stochastic choice made while training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrainSeed(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClassifierModel {
    DecisionTree(TreeModel),
    LogisticRegression(LogisticModel),
    RandomForest(ForestModel),
    Svm(SvmModel),
    PlsDa(PlsModel),
}

/// Trains the classifier described by `spec`.
pub fn fit(
    x: &Array2<f64>,
    y: &[SampleLabel],
    spec: &ClassifierSpec,
    seed: TrainSeed,
) -> Result<ClassifierModel> {
    spec.check()?;
    Ok(match spec {
        ClassifierSpec::DecisionTree(p) => ClassifierModel::DecisionTree(fit_tree(x, y, p)?),
        ClassifierSpec::LogisticRegression(p) => {
            ClassifierModel::LogisticRegression(fit_logistic(x, y, p)?)
        }
        ClassifierSpec::RandomForest(p) => ClassifierModel::RandomForest(fit_forest(x, y, p, seed)?),
        ClassifierSpec::Svm(p) => ClassifierModel::Svm(fit_svm(x, y, p, seed)?),
        ClassifierSpec::PlsDa(p) => ClassifierModel::PlsDa(fit_plsda(x, y, p)?),
    })
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierModel::DecisionTree(_) => ClassifierKind::DecisionTree,
            ClassifierModel::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            ClassifierModel::RandomForest(_) => ClassifierKind::RandomForest,
            ClassifierModel::Svm(_) => ClassifierKind::Svm,
            ClassifierModel::PlsDa(_) => ClassifierKind::PlsDa,
        }
    }

    pub fn spec(&self) -> ClassifierSpec {
        match self {
            ClassifierModel::DecisionTree(m) => ClassifierSpec::DecisionTree(m.params.clone()),
            ClassifierModel::LogisticRegression(m) => {
                ClassifierSpec::LogisticRegression(m.params.clone())
            }
            ClassifierModel::RandomForest(m) => ClassifierSpec::RandomForest(m.params.clone()),
            ClassifierModel::Svm(m) => ClassifierSpec::Svm(m.params.clone()),
            ClassifierModel::PlsDa(m) => ClassifierSpec::PlsDa(m.params.clone()),
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            ClassifierModel::DecisionTree(m) => m.tree.n_features,
            ClassifierModel::LogisticRegression(m) => m.weights.len(),
            ClassifierModel::RandomForest(m) => m.n_features,
            ClassifierModel::Svm(m) => m.n_features(),
            ClassifierModel::PlsDa(m) => m.x_mean.len(),
        }
    }

    fn score_row(&self, x: &[f64]) -> f64 {
        match self {
            ClassifierModel::DecisionTree(m) => m.tree.infected_fraction(x),
            ClassifierModel::LogisticRegression(m) => m.probability(x),
            ClassifierModel::RandomForest(m) => m.vote_fraction(x),
            ClassifierModel::Svm(m) => m.margin(x),
            ClassifierModel::PlsDa(m) => m.response(x),
        }
    }

    fn label_for_score(&self, score: f64) -> SampleLabel {
        let infected = match self {
            ClassifierModel::DecisionTree(_)
            | ClassifierModel::LogisticRegression(_)
            | ClassifierModel::RandomForest(_) => score > 0.5,
            ClassifierModel::Svm(_) => score > 0.0,
            ClassifierModel::PlsDa(m) => score > m.params.threshold,
        };
        SampleLabel::from_infected(infected)
    }

    fn check_dim(&self, x: &Array2<f64>) -> Result<()> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.ncols(),
            });
        }
        Ok(())
    }

    /// Probability (logistic), infected vote or leaf fraction (tree, forest),
    /// signed margin (SVM) or regressed response (PLS-DA).
    pub fn decision_score(&self, x: &Array2<f64>) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(x.rows()
            .into_iter()
            .map(|r| self.score_row(&r.to_vec()))
            .collect())
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Vec<SampleLabel>> {
        Ok(self
            .decision_score(x)?
            .into_iter()
            .map(|s| self.label_for_score(s))
            .collect())
    }

    /// Labels and scores together; the label is always derived from the score.
    pub fn predict_with_scores(&self, x: &Array2<f64>) -> Result<(Vec<SampleLabel>, Vec<f64>)> {
        let scores = self.decision_score(x)?;
        let labels = scores.iter().map(|&s| self.label_for_score(s)).collect();
        Ok((labels, scores))
    }
}

pub(crate) fn check_training_data(x: &Array2<f64>, y: &[SampleLabel], need_both: bool) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch(format!(
            "{} rows, {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::DegenerateData(format!("training matrix is {:?}", x.dim())));
    }
    if need_both {
        let infected = y.iter().filter(|l| l.is_infected()).count();
        if infected == 0 || infected == y.len() {
            return Err(Error::SingleClassTraining);
        }
    }
    Ok(())
}

/// `{0, 1}` coding with Infected = 1.
pub(crate) fn indicator(y: &[SampleLabel]) -> Vec<f64> {
    y.iter().map(|l| if l.is_infected() { 1.0 } else { 0.0 }).collect()
}
