use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::SampleLabel;

/// Binary metrics with infected as the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when only one class occurs in the labels.
    pub roc_auc: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(
    predictions: &[SampleLabel],
    scores: &[f64],
    labels: &[SampleLabel],
) -> Result<MetricSet> {
    let n = labels.len();
    if n == 0 {
        return Err(Error::LengthMismatch("no samples to score".into()));
    }
    if predictions.len() != n || scores.len() != n {
        return Err(Error::LengthMismatch(format!(
            "{} predictions, {} scores, {} labels",
            predictions.len(),
            scores.len(),
            n
        )));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, l) in predictions.iter().zip(labels) {
        match (p.is_infected(), l.is_infected()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricSet {
        tp,
        fp,
        tn,
        fn_,
        accuracy: ratio(tp + tn, n),
        precision,
        recall,
        f1,
        roc_auc: roc_auc(scores, labels),
    })
}

/// Mann-Whitney form of the ROC-AUC with midranks for tied scores.
///
/// Ranks are carried doubled so the whole statistic stays in integers until
/// the final division.
pub fn roc_auc(scores: &[f64], labels: &[SampleLabel]) -> Option<f64> {
    let n_pos = labels.iter().filter(|l| l.is_infected()).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 || scores.len() != labels.len() {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut twice_rank_sum = 0u64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the midrank (i + j + 2) / 2
        let twice_mid = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            if labels[k].is_infected() {
                twice_rank_sum += twice_mid;
            }
        }
        i = j + 1;
    }
    let num = twice_rank_sum - n_pos * (n_pos + 1);
    Some(num as f64 / (2 * n_pos * n_neg) as f64)
}
