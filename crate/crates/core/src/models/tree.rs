//! CART classification tree with Gini impurity.
//!
//! Candidate thresholds are midpoints between consecutive distinct values of
//! a feature; a sample goes left when its value is `<= threshold`. Split
//! quality is compared exactly in integer arithmetic, so ties are broken
//! purely by order: lower feature index first, then lower threshold.

use ndarray::Array2;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::spec::TreeParams;
use super::{check_training_data, FeaturesPerSplit};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::spectrum::SampleLabel;

/// `1 - sum(p_c^2)`.
pub fn gini_impurity(class_counts: &[u64]) -> Result<f64> {
    let total: u64 = class_counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyNode);
    }
    let t = total as f64;
    Ok(1.0 - class_counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// `[not_infected, infected]` training counts.
        counts: [u64; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        counts: [u64; 2],
    },
}

impl Node {
    pub fn counts(&self) -> [u64; 2] {
        match self {
            Node::Leaf { counts } | Node::Split { counts, .. } => *counts,
        }
    }
}

/// Nodes in preorder; index 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub n_features: usize,
    /// Total weighted Gini decrease per feature, normalized by the number of
    /// training rows reaching the root.
    pub impurity_decrease: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub params: TreeParams,
    pub tree: Tree,
}

fn counts_of(y: &[SampleLabel], idx: &[usize]) -> [u64; 2] {
    let infected = idx.iter().filter(|&&i| y[i].is_infected()).count() as u64;
    [idx.len() as u64 - infected, infected]
}

pub(crate) fn majority(counts: [u64; 2]) -> SampleLabel {
    SampleLabel::from_infected(counts[1] > counts[0])
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    // purity score (l0^2 + l1^2) / nl + (r0^2 + r1^2) / nr as a fraction
    num: u128,
    den: u128,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        self.num * other.den > other.num * self.den
    }
}

pub(crate) struct Builder<'a> {
    x: &'a Array2<f64>,
    y: &'a [SampleLabel],
    params: TreeParams,
    features_per_split: FeaturesPerSplit,
    rng: Option<&'a mut Rng>,
    nodes: Vec<Node>,
    impurity_decrease: Vec<f64>,
    n_root: f64,
}

impl<'a> Builder<'a> {
    pub(crate) fn new(
        x: &'a Array2<f64>,
        y: &'a [SampleLabel],
        params: TreeParams,
        features_per_split: FeaturesPerSplit,
        rng: Option<&'a mut Rng>,
    ) -> Self {
        Builder {
            x,
            y,
            params,
            features_per_split,
            rng,
            nodes: Vec::new(),
            impurity_decrease: vec![0.0; x.ncols()],
            n_root: 0.0,
        }
    }

    pub(crate) fn build(mut self, mut idx: Vec<usize>) -> Tree {
        self.n_root = idx.len() as f64;
        self.grow(&mut idx, 0);
        Tree {
            nodes: self.nodes,
            n_features: self.x.ncols(),
            impurity_decrease: self.impurity_decrease,
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x.ncols();
        let m = self.features_per_split.resolve(d);
        match self.rng.as_deref_mut() {
            Some(rng) if m < d => {
                let mut f = sample(rng, d, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn best_split(&mut self, idx: &mut [usize]) -> Option<Candidate> {
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf;
        let features = self.candidate_features();
        let counts = counts_of(self.y, idx);
        let mut best: Option<Candidate> = None;
        for f in features {
            let x = self.x;
            idx.sort_by(|&a, &b| x[[a, f]].total_cmp(&x[[b, f]]).then(a.cmp(&b)));
            let mut left = [0u64; 2];
            for p in 1..n {
                left[self.y[idx[p - 1]].is_infected() as usize] += 1;
                let lo = x[[idx[p - 1], f]];
                let hi = x[[idx[p], f]];
                if lo >= hi || p < min_leaf || n - p < min_leaf {
                    continue;
                }
                let right = [counts[0] - left[0], counts[1] - left[1]];
                let (nl, nr) = (p as u128, (n - p) as u128);
                let a = (left[0] as u128).pow(2) + (left[1] as u128).pow(2);
                let b = (right[0] as u128).pow(2) + (right[1] as u128).pow(2);
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                let cand = Candidate {
                    feature: f,
                    threshold,
                    num: a * nr + b * nl,
                    den: nl * nr,
                };
                if best.as_ref().is_none_or(|b| cand.beats(b)) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let counts = counts_of(self.y, idx);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || depth >= self.params.max_depth || idx.len() < 2 * self.params.min_samples_leaf {
            return at;
        }
        let Some(split) = self.best_split(idx) else {
            return at;
        };
        let x = self.x;
        let f = split.feature;
        idx.sort_by(|&a, &b| x[[a, f]].total_cmp(&x[[b, f]]).then(a.cmp(&b)));
        let n_left = idx.iter().filter(|&&i| x[[i, f]] <= split.threshold).count();
        let n_node = idx.len() as f64;
        let (left_idx, right_idx) = idx.split_at_mut(n_left);

        let g = |c: [u64; 2]| gini_impurity(&c).unwrap_or(0.0);
        let lc = counts_of(self.y, left_idx);
        let rc = counts_of(self.y, right_idx);
        let decrease = n_node * g(counts)
            - left_idx.len() as f64 * g(lc)
            - right_idx.len() as f64 * g(rc);
        self.impurity_decrease[f] += decrease.max(0.0) / self.n_root;

        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[at] = Node::Split {
            feature: f,
            threshold: split.threshold,
            left,
            right,
            counts,
        };
        at
    }
}

impl Tree {
    pub fn leaf_counts(&self, x: &[f64]) -> [u64; 2] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_one(&self, x: &[f64]) -> SampleLabel {
        majority(self.leaf_counts(x))
    }

    /// Share of infected training samples in the reached leaf.
    pub fn infected_fraction(&self, x: &[f64]) -> f64 {
        let c = self.leaf_counts(x);
        c[1] as f64 / (c[0] + c[1]) as f64
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

pub fn fit_tree(x: &Array2<f64>, y: &[SampleLabel], params: &TreeParams) -> Result<TreeModel> {
    check_training_data(x, y, false)?;
    let tree = Builder::new(x, y, params.clone(), FeaturesPerSplit::All, None)
        .build((0..x.nrows()).collect());
    Ok(TreeModel {
        params: params.clone(),
        tree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labels(v: &[u8]) -> Vec<SampleLabel> {
        v.iter().map(|&b| SampleLabel::from_infected(b == 1)).collect()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini_impurity(&[4, 0]).unwrap(), 0.0);
        assert_eq!(gini_impurity(&[2, 2]).unwrap(), 0.5);
        assert_eq!(gini_impurity(&[3, 1]).unwrap(), 0.375);
        assert!(matches!(gini_impurity(&[0, 0]), Err(Error::EmptyNode)));
    }

    #[test]
    fn pure_data_is_one_leaf() {
        let x = array![[1.0], [2.0], [3.0]];
        let m = fit_tree(&x, &labels(&[1, 1, 1]), &TreeParams::default()).unwrap();
        assert_eq!(m.tree.nodes.len(), 1);
        assert_eq!(m.tree.predict_one(&[10.0]), SampleLabel::Infected);
    }

    #[test]
    fn xor_depth_two() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = labels(&[0, 1, 1, 0]);
        let params = TreeParams {
            max_depth: 2,
            min_samples_leaf: 1,
        };
        let m = fit_tree(&x, &y, &params).unwrap();
        for (row, want) in x.rows().into_iter().zip(&y) {
            assert_eq!(m.tree.predict_one(&row.to_vec()), *want);
        }
        let stump = fit_tree(&x, &y, &TreeParams { max_depth: 1, ..params }).unwrap();
        assert_eq!(stump.tree.depth(), 1);
    }

    #[test]
    fn split_tie_breaks_to_lower_feature_then_threshold() {
        // both features split the classes perfectly
        let x = array![[1.0, 10.0], [2.0, 20.0], [3.0, 30.0], [4.0, 40.0]];
        let y = labels(&[0, 0, 1, 1]);
        let m = fit_tree(&x, &y, &TreeParams::default()).unwrap();
        match &m.tree.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
            }
            n => panic!("{n:?}"),
        }
    }

    #[test]
    fn majority_tie_goes_not_infected() {
        assert_eq!(majority([2, 2]), SampleLabel::NotInfected);
        let x = array![[1.0], [1.0]];
        let m = fit_tree(&x, &labels(&[0, 1]), &TreeParams::default()).unwrap();
        assert_eq!(m.tree.predict_one(&[1.0]), SampleLabel::NotInfected);
        assert_eq!(m.tree.infected_fraction(&[1.0]), 0.5);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let x = array![[1.0], [2.0], [3.0], [4.0], [5.0]];
        let y = labels(&[1, 0, 0, 0, 0]);
        let m = fit_tree(&x, &y, &TreeParams { max_depth: 4, min_samples_leaf: 2 }).unwrap();
        for n in &m.tree.nodes {
            if let Node::Leaf { counts } = n {
                assert!(counts[0] + counts[1] >= 2);
            }
        }
    }
}
