use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::models::{
    fit_forest, fit_logistic, FeaturesPerSplit, ForestParams, LogisticParams, Penalty, TrainSeed,
};
use crate::spectrum::SampleLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    /// Impurity importances from a seeded 100-tree forest.
    Importance,
    /// Absolute coefficients of an L2 logistic fit.
    AbsWeight,
}

impl SelectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMethod::Importance => "importance",
            SelectionMethod::AbsWeight => "abs_weight",
        }
    }
}

pub const SELECTION_FOREST_TREES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMask {
    /// Strictly increasing source column indices.
    pub kept_indices: Vec<usize>,
    /// Score of each kept column, aligned with `kept_indices`.
    pub scores: Vec<f64>,
    pub n_source_features: usize,
    /// Set when more features were requested than exist.
    pub clamped: bool,
}

impl SelectionMask {
    pub fn identity(d: usize) -> Self {
        SelectionMask {
            kept_indices: (0..d).collect(),
            scores: vec![0.0; d],
            n_source_features: d,
            clamped: false,
        }
    }

    pub fn len(&self) -> usize {
        self.kept_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept_indices.is_empty()
    }

    pub fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.n_features() != self.n_source_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_source_features,
                found: x.n_features(),
            });
        }
        Ok(x.select_columns(&self.kept_indices))
    }

    pub fn apply_array(&self, x: &ndarray::Array2<f64>) -> Result<ndarray::Array2<f64>> {
        if x.ncols() != self.n_source_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_source_features,
                found: x.ncols(),
            });
        }
        Ok(x.select(ndarray::Axis(1), &self.kept_indices)
            .as_standard_layout()
            .into_owned())
    }
}

/// Scores every column, keeps the `k` best (ties to the lower index) and
/// returns them in column order.
pub fn select_top_k(
    x: &FeatureMatrix,
    labels: &[SampleLabel],
    k: usize,
    method: SelectionMethod,
    seed: TrainSeed,
) -> Result<SelectionMask> {
    if k == 0 {
        return Err(Error::config("top-k selection needs k >= 1"));
    }
    if labels.len() != x.n_samples() {
        return Err(Error::LengthMismatch(format!(
            "{} labels for {} samples",
            labels.len(),
            x.n_samples()
        )));
    }
    let d = x.n_features();
    let clamped = k > d;
    if clamped {
        log::info!("top-{k} selection on {d} features: keeping all");
    }
    let k = k.min(d);

    let scores: Vec<f64> = match method {
        SelectionMethod::Importance => {
            let params = ForestParams {
                n_trees: SELECTION_FOREST_TREES,
                max_depth: usize::MAX,
                min_samples_leaf: 1,
                bootstrap: true,
                features_per_split: FeaturesPerSplit::Sqrt,
            };
            fit_forest(x.values(), labels, &params, seed)?.importances
        }
        SelectionMethod::AbsWeight => {
            let params = LogisticParams {
                penalty: Penalty::L2,
                lambda: 0.01,
                ..LogisticParams::default()
            };
            fit_logistic(x.values(), labels, &params)?
                .weights
                .iter()
                .map(|w| w.abs())
                .collect()
        }
    };

    let mut ranked: Vec<usize> = (0..d).collect();
    ranked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = ranked[..k].to_vec();
    kept.sort_unstable();
    Ok(SelectionMask {
        scores: kept.iter().map(|&i| scores[i]).collect(),
        kept_indices: kept,
        n_source_features: d,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn noisy_with_signal(seed: u64) -> (FeatureMatrix, Vec<SampleLabel>) {
        let mut rng = crate::rng::rng_from(seed, &[]);
        let n = 40;
        let y: Vec<_> = (0..n).map(|i| SampleLabel::from_infected(i % 2 == 0)).collect();
        let x = Array2::from_shape_fn((n, 12), |(i, j)| {
            if j == 7 {
                if y[i].is_infected() { 1.0 } else { -1.0 }
            } else {
                rng.random::<f64>() * 2.0 - 1.0
            }
        });
        (FeatureMatrix::from_values(x).unwrap(), y)
    }

    #[test]
    fn identity_when_keeping_everything() {
        let (x, y) = noisy_with_signal(1);
        for method in [SelectionMethod::Importance, SelectionMethod::AbsWeight] {
            let m = select_top_k(&x, &y, 12, method, TrainSeed(3)).unwrap();
            assert_eq!(m.kept_indices, (0..12).collect::<Vec<_>>());
            assert!(!m.clamped);
            let m = select_top_k(&x, &y, 50, method, TrainSeed(3)).unwrap();
            assert!(m.clamped && m.len() == 12);
        }
    }

    #[test]
    fn label_column_wins() {
        let (x, y) = noisy_with_signal(2);
        for method in [SelectionMethod::Importance, SelectionMethod::AbsWeight] {
            let m = select_top_k(&x, &y, 1, method, TrainSeed(3)).unwrap();
            assert_eq!(m.kept_indices, [7]);
        }
    }

    #[test]
    fn reproducible_and_rank_ordered() {
        let (x, y) = noisy_with_signal(3);
        let a = select_top_k(&x, &y, 5, SelectionMethod::Importance, TrainSeed(11)).unwrap();
        let b = select_top_k(&x, &y, 5, SelectionMethod::Importance, TrainSeed(11)).unwrap();
        assert_eq!(a, b);
        assert!(a.kept_indices.windows(2).all(|w| w[0] < w[1]));
        let min_kept = a.scores.iter().copied().fold(f64::INFINITY, f64::min);
        let all = fit_forest(
            x.values(),
            &y,
            &ForestParams {
                n_trees: SELECTION_FOREST_TREES,
                max_depth: usize::MAX,
                min_samples_leaf: 1,
                bootstrap: true,
                features_per_split: FeaturesPerSplit::Sqrt,
            },
            TrainSeed(11),
        )
        .unwrap()
        .importances;
        for (i, s) in all.iter().enumerate() {
            if !a.kept_indices.contains(&i) {
                assert!(*s <= min_kept);
            }
        }
        let sub = a.apply(&x).unwrap();
        assert_eq!(sub.n_features(), 5);
    }
}
