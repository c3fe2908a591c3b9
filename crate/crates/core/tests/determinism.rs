//! Every seeded operation, run twice, gives bit-identical results.

use gcims_core::eval::{evaluate_all, grid_search, stratified_kfold, stratified_split, AlgorithmPlan, EvalOptions};
use gcims_core::features::{select_top_k, FeatureConfig, SelectionMethod};
use gcims_core::models::{fit_forest, ForestParams};
use gcims_core::pipeline::Selection;
use gcims_core::rng::rng_from;
use gcims_core::synth::generate;
use gcims_core::{ClassifierKind, ClassifierSpec, FeatureMatrix, PreprocessConfig, SampleLabel, SynthConfig, TrainSeed};
use ndarray::Array2;
use rand::Rng;

fn data() -> (Array2<f64>, Vec<SampleLabel>) {
    let mut rng = rng_from(31, &[]);
    let y: Vec<SampleLabel> = (0..40).map(|i| SampleLabel::from_infected(i % 2 == 0)).collect();
    let x = Array2::from_shape_fn((40, 12), |(i, j)| {
        rng.random_range(-1.0..1.0) + if j < 3 && y[i].is_infected() { 0.8 } else { 0.0 }
    });
    (x, y)
}

fn small_config() -> SynthConfig {
    SynthConfig {
        n_samples: 30,
        rows: 30,
        cols: 36,
        seed: 4,
        ..SynthConfig::default()
    }
}

#[test]
fn forest() {
    let (x, y) = data();
    let p = ForestParams::default();
    assert_eq!(fit_forest(&x, &y, &p, TrainSeed(5)).unwrap(), fit_forest(&x, &y, &p, TrainSeed(5)).unwrap());
    assert_ne!(fit_forest(&x, &y, &p, TrainSeed(5)).unwrap(), fit_forest(&x, &y, &p, TrainSeed(6)).unwrap());
}

#[test]
fn splits_and_folds() {
    let (_, y) = data();
    assert_eq!(stratified_split(&y, 0.2, 9).unwrap(), stratified_split(&y, 0.2, 9).unwrap());
    assert_eq!(stratified_kfold(&y, 5, 9).unwrap(), stratified_kfold(&y, 5, 9).unwrap());
}

#[test]
fn generator() {
    let a = generate(&small_config()).unwrap();
    assert_eq!(a, generate(&small_config()).unwrap());
    let b = generate(&SynthConfig { seed: 5, ..small_config() }).unwrap();
    assert_ne!(a, b);
}

#[test]
fn selection_and_grid() {
    let (x, y) = data();
    let fm = FeatureMatrix::from_values(x.clone()).unwrap();
    for m in [SelectionMethod::Importance, SelectionMethod::AbsWeight] {
        assert_eq!(
            select_top_k(&fm, &y, 4, m, TrainSeed(1)).unwrap(),
            select_top_k(&fm, &y, 4, m, TrainSeed(1)).unwrap()
        );
    }
    let folds = stratified_kfold(&y, 4, 2).unwrap();
    let grid = ClassifierSpec::default_grid(ClassifierKind::RandomForest);
    let sel = Some(Selection { method: SelectionMethod::Importance, k: 5 });
    let a = grid_search(&x, &y, &grid, &folds, sel, 3).unwrap();
    let b = grid_search(&x, &y, &grid, &folds, sel, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn whole_evaluation() {
    let ds = generate(&small_config()).unwrap();
    let plans: Vec<AlgorithmPlan> = ClassifierKind::ALL.iter().map(|&k| AlgorithmPlan::standard(k, None)).collect();
    let run = || {
        evaluate_all(
            &ds,
            &PreprocessConfig::standard(),
            &FeatureConfig::default(),
            &plans,
            &EvalOptions { test_fraction: 0.2, cv_folds: 3 },
            17,
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.to_csv(), b.to_csv());
}
