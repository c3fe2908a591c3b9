use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::FoldPlan;
use crate::error::{Error, Result};
use crate::models::{fit, ClassifierSpec, TrainSeed};
use crate::pipeline::Selection;
use crate::rng::derive_seed;
use crate::spectrum::SampleLabel;

/// Cross-validated accuracy of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub spec: ClassifierSpec,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Population standard deviation over folds.
    pub std_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub cells: Vec<CellResult>,
    /// Index of the best cell: highest mean, earliest on ties.
    pub best: usize,
}

impl GridResult {
    pub fn best_cell(&self) -> &CellResult {
        &self.cells[self.best]
    }
}

// (train x, train y, validation x, validation y)
type FoldData = (Array2<f64>, Vec<SampleLabel>, Array2<f64>, Vec<SampleLabel>);

fn accuracy(pred: &[SampleLabel], truth: &[SampleLabel]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Exhaustive grid search. When `selection` is set the mask is refitted on
/// each fold's training part. Model seeds are derived from
/// `(seed, fold, cell)`, so the table does not depend on scheduling.
pub fn grid_search(
    x: &Array2<f64>,
    y: &[SampleLabel],
    grid: &[ClassifierSpec],
    folds: &FoldPlan,
    selection: Option<Selection>,
    seed: u64,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::config("empty hyperparameter grid"));
    }
    if x.nrows() != y.len() {
        return Err(Error::LengthMismatch(format!("{} rows, {} labels", x.nrows(), y.len())));
    }
    let k = folds.k();
    let prepared: Vec<FoldData> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (train, val) = folds.split(f);
            let y_train: Vec<SampleLabel> = train.iter().map(|&i| y[i]).collect();
            let y_val: Vec<SampleLabel> = val.iter().map(|&i| y[i]).collect();
            let x_train = x.select(Axis(0), &train);
            let mask = Selection::fit(selection, &x_train, &y_train, derive_seed(seed, &[0, f as u64]))?;
            Ok((
                mask.apply_array(&x_train)?,
                y_train,
                mask.apply_array(&x.select(Axis(0), &val))?,
                y_val,
            ))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|c| (0..k).map(move |f| (c, f))).collect();
    let scores: Vec<f64> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let (xt, yt, xv, yv) = &prepared[f];
            let model = fit(xt, yt, &grid[c], TrainSeed(derive_seed(seed, &[1, f as u64, c as u64])))?;
            Ok(accuracy(&model.predict(xv)?, yv))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<CellResult> = grid
        .iter()
        .enumerate()
        .map(|(c, spec)| {
            let accs = scores[c * k..(c + 1) * k].to_vec();
            let mean = accs.iter().sum::<f64>() / k as f64;
            let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k as f64;
            CellResult {
                spec: spec.clone(),
                fold_accuracies: accs,
                mean_accuracy: mean,
                std_accuracy: var.sqrt(),
            }
        })
        .collect();
    let mut best = 0;
    for (i, c) in cells.iter().enumerate() {
        if c.mean_accuracy > cells[best].mean_accuracy {
            best = i;
        }
    }
    Ok(GridResult { cells, best })
}
