use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from;
use crate::spectrum::SampleLabel;

/// Disjoint train / test index lists, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// `k` disjoint folds covering every sample, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// (train, validation) indices for fold `i`.
    pub fn split(&self, i: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        train.sort_unstable();
        (train, self.folds[i].clone())
    }
}

fn by_class(labels: &[SampleLabel]) -> [Vec<usize>; 2] {
    let mut classes = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        classes[l.is_infected() as usize].push(i);
    }
    classes
}

/// Per-class test counts. Classes are ordered [not infected, infected].
///
/// The total is `round(n * f)`; each class first gets the floor of its
/// share and the leftover goes by largest remainder, ties to the larger
/// class and then to infected. Every class keeps at least one sample on
/// each side.
pub fn test_counts(class_sizes: [usize; 2], test_fraction: f64) -> Result<[usize; 2]> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::config(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    for (c, &size) in class_sizes.iter().enumerate() {
        if size < 2 {
            let name = SampleLabel::from_infected(c == 1).as_str();
            return Err(Error::ClassTooSmall(format!("{name} has {size} samples")));
        }
    }
    let n = class_sizes[0] + class_sizes[1];
    let total = (n as f64 * test_fraction).round() as usize;
    let share = class_sizes.map(|s| s as f64 * test_fraction);
    let mut counts = share.map(|s| s.floor() as usize);
    let mut order = [1usize, 0];
    order.sort_by(|&a, &b| {
        let ra = share[a] - counts[a] as f64;
        let rb = share[b] - counts[b] as f64;
        rb.total_cmp(&ra)
            .then(class_sizes[b].cmp(&class_sizes[a]))
            .then(b.cmp(&a))
    });
    let mut left = total.saturating_sub(counts[0] + counts[1]);
    for &c in order.iter().cycle().take(4) {
        if left == 0 {
            break;
        }
        if counts[c] < class_sizes[c] {
            counts[c] += 1;
            left -= 1;
        }
    }
    for c in 0..2 {
        counts[c] = counts[c].clamp(1, class_sizes[c] - 1);
    }
    Ok(counts)
}

pub fn stratified_split(labels: &[SampleLabel], test_fraction: f64, seed: u64) -> Result<SplitPlan> {
    let mut classes = by_class(labels);
    let counts = test_counts([classes[0].len(), classes[1].len()], test_fraction)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, members) in classes.iter_mut().enumerate() {
        members.shuffle(&mut rng_from(seed, &[c as u64]));
        test.extend_from_slice(&members[..counts[c]]);
        train.extend_from_slice(&members[counts[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan {
        train_indices: train,
        test_indices: test,
    })
}

/// Shuffles each class, then deals its members round-robin. The infected
/// class starts where the other class stopped so fold sizes stay within one.
pub fn stratified_kfold(labels: &[SampleLabel], k: usize, seed: u64) -> Result<FoldPlan> {
    let n = labels.len();
    if k < 2 {
        return Err(Error::config(format!("cross-validation needs k >= 2, got {k}")));
    }
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (c, mut members) in by_class(labels).into_iter().enumerate() {
        members.shuffle(&mut rng_from(seed, &[c as u64]));
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { folds })
}
