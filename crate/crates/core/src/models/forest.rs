use ndarray::Array2;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::ForestParams;
use super::tree::{Builder, Tree};
use super::{check_training_data, TrainSeed};
use crate::error::Result;
use crate::rng::rng_from;
use crate::spectrum::SampleLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub trees: Vec<Tree>,
    /// Mean per-tree normalized impurity decrease, renormalized to sum to one
    /// (all zeros when no tree split).
    pub importances: Vec<f64>,
    pub n_features: usize,
}

impl ForestModel {
    pub fn infected_votes(&self, x: &[f64]) -> usize {
        self.trees
            .iter()
            .filter(|t| t.predict_one(x).is_infected())
            .count()
    }

    pub fn vote_fraction(&self, x: &[f64]) -> f64 {
        self.infected_votes(x) as f64 / self.trees.len() as f64
    }
}

/// Tree `i` draws from its own stream seeded by `(master_seed, i)`, so trees
/// build in parallel yet the forest does not depend on scheduling.
pub fn fit_forest(
    x: &Array2<f64>,
    y: &[SampleLabel],
    params: &ForestParams,
    seed: TrainSeed,
) -> Result<ForestModel> {
    check_training_data(x, y, true)?;
    let n = x.nrows();
    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(seed.0, &[i as u64]);
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            Builder::new(x, y, params.tree_params(), params.features_per_split, Some(&mut rng))
                .build(idx)
        })
        .collect();

    let d = x.ncols();
    let mut importances = vec![0.0; d];
    for tree in &trees {
        let total: f64 = tree.impurity_decrease.iter().sum();
        if total > 0.0 {
            for (acc, v) in importances.iter_mut().zip(&tree.impurity_decrease) {
                *acc += v / total;
            }
        }
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    }
    Ok(ForestModel {
        params: params.clone(),
        trees,
        importances,
        n_features: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::spec::{FeaturesPerSplit, TreeParams};
    use crate::models::tree::fit_tree;
    use rand::Rng;

    fn data(seed: u64, n: usize, d: usize) -> (Array2<f64>, Vec<SampleLabel>) {
        let mut rng = rng_from(seed, &[]);
        let x = Array2::from_shape_fn((n, d), |_| rng.random::<f64>());
        let y = (0..n)
            .map(|i| SampleLabel::from_infected(x[[i, 0]] + 0.3 * rng.random::<f64>() > 0.65))
            .collect();
        (x, y)
    }

    #[test]
    fn single_full_tree_matches_fit_tree() {
        let (x, y) = data(1, 40, 5);
        let params = ForestParams {
            n_trees: 1,
            max_depth: 4,
            min_samples_leaf: 2,
            bootstrap: false,
            features_per_split: FeaturesPerSplit::All,
        };
        let forest = fit_forest(&x, &y, &params, TrainSeed(9)).unwrap();
        let tree = fit_tree(&x, &y, &TreeParams { max_depth: 4, min_samples_leaf: 2 }).unwrap();
        assert_eq!(forest.trees[0], tree.tree);
        let (xt, _) = data(2, 50, 5);
        for row in xt.rows() {
            let r = row.to_vec();
            assert_eq!(forest.trees[0].predict_one(&r), tree.tree.predict_one(&r));
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = data(3, 30, 8);
        let params = ForestParams {
            n_trees: 25,
            ..ForestParams::default()
        };
        let a = fit_forest(&x, &y, &params, TrainSeed(42)).unwrap();
        let b = fit_forest(&x, &y, &params, TrainSeed(42)).unwrap();
        assert_eq!(a, b);
        let bits = |m: &ForestModel| m.importances.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = fit_forest(&x, &y, &params, TrainSeed(43)).unwrap();
        assert_ne!(a.trees, c.trees);
    }

    #[test]
    fn importances_normalized() {
        let (x, y) = data(4, 60, 6);
        let m = fit_forest(&x, &y, &ForestParams { n_trees: 30, ..Default::default() }, TrainSeed(1)).unwrap();
        assert!(m.importances.iter().all(|&v| v >= 0.0));
        assert!((m.importances.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // feature 0 drives the labels
        let top = m
            .importances
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(top, 0);
    }
}
