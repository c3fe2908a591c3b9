//! Depth-1 trees against an exhaustive stump search.

use gcims_core::models::{fit_tree, Node, TreeParams};
use gcims_core::rng::rng_from;
use gcims_core::SampleLabel;
use ndarray::{array, Array2};
use rand::Rng;

/// Best stump by exact comparison of sum over children of
/// (c0^2 + c1^2) / n_child; ties to the lower feature, then the lower
/// threshold. `None` when the node is pure or no feature varies.
fn best_stump(x: &Array2<f64>, y: &[SampleLabel]) -> Option<(usize, f64)> {
    let inf = y.iter().filter(|l| l.is_infected()).count();
    if inf == 0 || inf == y.len() {
        return None;
    }
    let mut best: Option<(usize, f64, u128, u128)> = None;
    for f in 0..x.ncols() {
        let mut vals: Vec<f64> = x.column(f).to_vec();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let mut l = [0u128; 2];
            let mut r = [0u128; 2];
            for (i, lab) in y.iter().enumerate() {
                let side = if x[[i, f]] <= t { &mut l } else { &mut r };
                side[lab.is_infected() as usize] += 1;
            }
            let (nl, nr) = (l[0] + l[1], r[0] + r[1]);
            let num = (l[0] * l[0] + l[1] * l[1]) * nr + (r[0] * r[0] + r[1] * r[1]) * nl;
            let den = nl * nr;
            if best.is_none_or(|(_, _, bn, bd)| num * bd > bn * den) {
                best = Some((f, t, num, den));
            }
        }
    }
    best.map(|(f, t, _, _)| (f, t))
}

#[test]
fn depth_one_equals_exhaustive_stump() {
    let params = TreeParams {
        max_depth: 1,
        min_samples_leaf: 1,
    };
    let mut splits = 0;
    for trial in 0..200u64 {
        let mut rng = rng_from(77, &[trial]);
        let n = rng.random_range(2..=8);
        let d = rng.random_range(1..=3);
        // small integer grid so duplicate values and ties occur
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(0..4) as f64);
        let y: Vec<SampleLabel> = (0..n).map(|_| SampleLabel::from_infected(rng.random())).collect();
        let both = y.iter().any(|l| l.is_infected()) && y.iter().any(|l| !l.is_infected());
        if !both {
            continue;
        }
        let tree = fit_tree(&x, &y, &params).unwrap().tree;
        match (best_stump(&x, &y), &tree.nodes[0]) {
            (None, Node::Leaf { .. }) => {}
            (Some((f, t)), Node::Split { feature, threshold, .. }) => {
                assert_eq!((*feature, *threshold), (f, t), "trial {trial}");
                splits += 1;
            }
            (o, node) => panic!("trial {trial}: oracle {o:?}, tree root {node:?}"),
        }
    }
    assert!(splits > 100);
}

#[test]
fn xor_depth_two_is_perfect() {
    let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
    let y: Vec<SampleLabel> = [false, true, true, false].map(SampleLabel::from_infected).to_vec();
    let tree = fit_tree(
        &x,
        &y,
        &TreeParams {
            max_depth: 2,
            min_samples_leaf: 1,
        },
    )
    .unwrap()
    .tree;
    for (row, want) in x.rows().into_iter().zip(&y) {
        assert_eq!(tree.predict_one(row.as_slice().unwrap()), *want);
    }
}
