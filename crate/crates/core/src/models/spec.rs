use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five classifier families, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    LogisticRegression,
    RandomForest,
    Svm,
    PlsDa,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 5] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::LogisticRegression,
        ClassifierKind::RandomForest,
        ClassifierKind::Svm,
        ClassifierKind::PlsDa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::LogisticRegression => "logistic_regression",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::Svm => "svm",
            ClassifierKind::PlsDa => "plsda",
        }
    }

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag as usize).copied()
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "decision_tree" | "dt" | "tree" => ClassifierKind::DecisionTree,
            "logistic_regression" | "lr" | "logistic" => ClassifierKind::LogisticRegression,
            "random_forest" | "rf" | "forest" => ClassifierKind::RandomForest,
            "svm" => ClassifierKind::Svm,
            "plsda" | "pls-da" | "pls_da" | "pls" => ClassifierKind::PlsDa,
            other => return Err(Error::config(format!("unknown algorithm {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 5,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Penalty {
    L1,
    L2,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub penalty: Penalty,
    pub lambda: f64,
    /// Upper bound on the gradient step; the fit never steps further than
    /// the reciprocal Lipschitz constant of the loss allows.
    pub learning_rate: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            penalty: Penalty::L2,
            lambda: 0.01,
            learning_rate: 1.0,
            max_iters: 1000,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    Sqrt,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            FeaturesPerSplit::Sqrt => ((d as f64).sqrt() as usize).max(1),
            FeaturesPerSplit::All => d,
            FeaturesPerSplit::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub features_per_split: FeaturesPerSplit,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 8,
            min_samples_leaf: 1,
            bootstrap: true,
            features_per_split: FeaturesPerSplit::Sqrt,
        }
    }
}

impl ForestParams {
    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Poly,
}

/// Kernel scale. `Scale` resolves at fit time to `1 / (d * var(X))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    Scale,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelKind,
    pub degree: u32,
    pub gamma: Gamma,
    pub coef0: f64,
    pub c: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            kernel: KernelKind::Linear,
            degree: 2,
            gamma: Gamma::Scale,
            coef0: 1.0,
            c: 1.0,
            max_iters: 2000,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlsParams {
    pub n_components: usize,
    pub threshold: f64,
}

impl Default for PlsParams {
    fn default() -> Self {
        PlsParams {
            n_components: 2,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    DecisionTree(TreeParams),
    LogisticRegression(LogisticParams),
    RandomForest(ForestParams),
    Svm(SvmParams),
    PlsDa(PlsParams),
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ConfigInvalid(msg()))
    }
}

impl ClassifierSpec {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::DecisionTree => ClassifierSpec::DecisionTree(TreeParams::default()),
            ClassifierKind::LogisticRegression => {
                ClassifierSpec::LogisticRegression(LogisticParams::default())
            }
            ClassifierKind::RandomForest => ClassifierSpec::RandomForest(ForestParams::default()),
            ClassifierKind::Svm => ClassifierSpec::Svm(SvmParams::default()),
            ClassifierKind::PlsDa => ClassifierSpec::PlsDa(PlsParams::default()),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierSpec::DecisionTree(_) => ClassifierKind::DecisionTree,
            ClassifierSpec::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            ClassifierSpec::RandomForest(_) => ClassifierKind::RandomForest,
            ClassifierSpec::Svm(_) => ClassifierKind::Svm,
            ClassifierSpec::PlsDa(_) => ClassifierKind::PlsDa,
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            ClassifierSpec::DecisionTree(p) => {
                ensure(p.max_depth >= 1, || "max_depth must be >= 1".into())?;
                ensure(p.min_samples_leaf >= 1, || "min_samples_leaf must be >= 1".into())
            }
            ClassifierSpec::LogisticRegression(p) => {
                ensure(p.lambda >= 0.0 && p.lambda.is_finite(), || format!("lambda {}", p.lambda))?;
                ensure(p.learning_rate > 0.0, || format!("learning_rate {}", p.learning_rate))?;
                ensure(p.max_iters >= 1, || "max_iters must be >= 1".into())?;
                ensure(p.tol > 0.0, || format!("tol {}", p.tol))
            }
            ClassifierSpec::RandomForest(p) => {
                ensure(p.n_trees >= 1, || "n_trees must be >= 1".into())?;
                ensure(p.max_depth >= 1, || "max_depth must be >= 1".into())?;
                ensure(p.min_samples_leaf >= 1, || "min_samples_leaf must be >= 1".into())?;
                ensure(p.features_per_split != FeaturesPerSplit::Count(0), || {
                    "features_per_split must be >= 1".into()
                })
            }
            ClassifierSpec::Svm(p) => {
                if p.kernel == KernelKind::Poly {
                    ensure(p.degree >= 2, || format!("poly degree {} < 2", p.degree))?;
                }
                if let Gamma::Fixed(g) = p.gamma {
                    ensure(g > 0.0 && g.is_finite(), || format!("gamma {g}"))?;
                }
                ensure(p.coef0.is_finite(), || "coef0 must be finite".into())?;
                ensure(p.c > 0.0 && p.c.is_finite(), || format!("C {}", p.c))?;
                ensure(p.max_iters >= 1, || "max_iters must be >= 1".into())?;
                ensure(p.tol > 0.0, || format!("tol {}", p.tol))
            }
            ClassifierSpec::PlsDa(p) => {
                ensure(p.n_components >= 1, || "n_components must be >= 1".into())?;
                ensure(p.threshold.is_finite(), || "threshold must be finite".into())
            }
        }
    }

    /// Flat `key = value` form, `kind` first.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v = vec![("kind".to_string(), self.kind().to_string())];
        let mut push = |k: &str, val: String| v.push((k.to_string(), val));
        match self {
            ClassifierSpec::DecisionTree(p) => {
                push("max_depth", p.max_depth.to_string());
                push("min_samples_leaf", p.min_samples_leaf.to_string());
            }
            ClassifierSpec::LogisticRegression(p) => {
                push(
                    "penalty",
                    match p.penalty {
                        Penalty::L1 => "l1",
                        Penalty::L2 => "l2",
                        Penalty::None => "none",
                    }
                    .into(),
                );
                push("lambda", format!("{:?}", p.lambda));
                push("learning_rate", format!("{:?}", p.learning_rate));
                push("max_iters", p.max_iters.to_string());
                push("tol", format!("{:?}", p.tol));
            }
            ClassifierSpec::RandomForest(p) => {
                push("n_trees", p.n_trees.to_string());
                push("max_depth", p.max_depth.to_string());
                push("min_samples_leaf", p.min_samples_leaf.to_string());
                push("bootstrap", p.bootstrap.to_string());
                push(
                    "features_per_split",
                    match p.features_per_split {
                        FeaturesPerSplit::Sqrt => "sqrt".into(),
                        FeaturesPerSplit::All => "all".into(),
                        FeaturesPerSplit::Count(k) => k.to_string(),
                    },
                );
            }
            ClassifierSpec::Svm(p) => {
                push(
                    "kernel",
                    match p.kernel {
                        KernelKind::Linear => "linear",
                        KernelKind::Poly => "poly",
                    }
                    .into(),
                );
                push("degree", p.degree.to_string());
                push(
                    "gamma",
                    match p.gamma {
                        Gamma::Scale => "scale".into(),
                        Gamma::Fixed(g) => format!("{g:?}"),
                    },
                );
                push("coef0", format!("{:?}", p.coef0));
                push("c", format!("{:?}", p.c));
                push("max_iters", p.max_iters.to_string());
                push("tol", format!("{:?}", p.tol));
            }
            ClassifierSpec::PlsDa(p) => {
                push("n_components", p.n_components.to_string());
                push("threshold", format!("{:?}", p.threshold));
            }
        }
        v
    }

    /// Starts from the kind's defaults and applies `overrides`; keys that do
    /// not belong to the kind are rejected.
    pub fn from_pairs(kind: ClassifierKind, overrides: &BTreeMap<String, String>) -> Result<Self> {
        let mut spec = ClassifierSpec::default_for(kind);
        for (key, value) in overrides {
            if key == "kind" {
                if value.parse::<ClassifierKind>()? != kind {
                    return Err(Error::config(format!("kind {value} conflicts with {kind}")));
                }
                continue;
            }
            spec.set(key, value)?;
        }
        spec.check()?;
        Ok(spec)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("{key}: cannot parse {value:?}")))
        }
        let kind = self.kind();
        let unknown = || Error::config(format!("{key} is not a parameter of {kind}"));
        match self {
            ClassifierSpec::DecisionTree(p) => match key {
                "max_depth" => p.max_depth = num(key, value)?,
                "min_samples_leaf" => p.min_samples_leaf = num(key, value)?,
                _ => return Err(unknown()),
            },
            ClassifierSpec::LogisticRegression(p) => match key {
                "penalty" => {
                    p.penalty = match value.trim() {
                        "l1" => Penalty::L1,
                        "l2" => Penalty::L2,
                        "none" => Penalty::None,
                        v => return Err(Error::config(format!("penalty {v:?}"))),
                    }
                }
                "lambda" => p.lambda = num(key, value)?,
                "learning_rate" => p.learning_rate = num(key, value)?,
                "max_iters" => p.max_iters = num(key, value)?,
                "tol" => p.tol = num(key, value)?,
                _ => return Err(unknown()),
            },
            ClassifierSpec::RandomForest(p) => match key {
                "n_trees" => p.n_trees = num(key, value)?,
                "max_depth" => p.max_depth = num(key, value)?,
                "min_samples_leaf" => p.min_samples_leaf = num(key, value)?,
                "bootstrap" => p.bootstrap = num(key, value)?,
                "features_per_split" => {
                    p.features_per_split = match value.trim() {
                        "sqrt" => FeaturesPerSplit::Sqrt,
                        "all" => FeaturesPerSplit::All,
                        v => FeaturesPerSplit::Count(num(key, v)?),
                    }
                }
                _ => return Err(unknown()),
            },
            ClassifierSpec::Svm(p) => match key {
                "kernel" => {
                    p.kernel = match value.trim() {
                        "linear" => KernelKind::Linear,
                        "poly" => KernelKind::Poly,
                        v => return Err(Error::config(format!("kernel {v:?}"))),
                    }
                }
                "degree" => p.degree = num(key, value)?,
                "gamma" => {
                    p.gamma = match value.trim() {
                        "scale" => Gamma::Scale,
                        v => Gamma::Fixed(num(key, v)?),
                    }
                }
                "coef0" => p.coef0 = num(key, value)?,
                "c" | "C" => p.c = num(key, value)?,
                "max_iters" => p.max_iters = num(key, value)?,
                "tol" => p.tol = num(key, value)?,
                _ => return Err(unknown()),
            },
            ClassifierSpec::PlsDa(p) => match key {
                "n_components" => p.n_components = num(key, value)?,
                "threshold" => p.threshold = num(key, value)?,
                _ => return Err(unknown()),
            },
        }
        Ok(())
    }

    /// Hyperparameter grid searched during evaluation, cheapest cells first.
    pub fn default_grid(kind: ClassifierKind) -> Vec<ClassifierSpec> {
        let mut grid = Vec::new();
        match kind {
            ClassifierKind::DecisionTree => {
                for max_depth in [2, 3, 5, 8] {
                    for min_samples_leaf in [1, 3, 5] {
                        grid.push(ClassifierSpec::DecisionTree(TreeParams {
                            max_depth,
                            min_samples_leaf,
                        }));
                    }
                }
            }
            ClassifierKind::LogisticRegression => {
                for penalty in [Penalty::L1, Penalty::L2] {
                    for lambda in [0.001, 0.01, 0.1, 1.0] {
                        grid.push(ClassifierSpec::LogisticRegression(LogisticParams {
                            penalty,
                            lambda,
                            ..LogisticParams::default()
                        }));
                    }
                }
            }
            ClassifierKind::RandomForest => {
                for n_trees in [50, 100, 200] {
                    for max_depth in [4, 8, 16] {
                        grid.push(ClassifierSpec::RandomForest(ForestParams {
                            n_trees,
                            max_depth,
                            ..ForestParams::default()
                        }));
                    }
                }
            }
            ClassifierKind::Svm => {
                for c in [0.01, 0.1, 1.0, 10.0] {
                    grid.push(ClassifierSpec::Svm(SvmParams {
                        kernel: KernelKind::Linear,
                        c,
                        ..SvmParams::default()
                    }));
                }
                for degree in [2, 3] {
                    for c in [0.1, 1.0, 10.0] {
                        grid.push(ClassifierSpec::Svm(SvmParams {
                            kernel: KernelKind::Poly,
                            degree,
                            c,
                            ..SvmParams::default()
                        }));
                    }
                }
            }
            ClassifierKind::PlsDa => {
                for n_components in [1, 2, 3, 4, 5, 8] {
                    grid.push(ClassifierSpec::PlsDa(PlsParams {
                        n_components,
                        threshold: 0.5,
                    }));
                }
            }
        }
        grid
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .to_pairs()
            .into_iter()
            .skip(1)
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        write!(f, "{}({})", self.kind(), pairs.join(", "))
    }
}
