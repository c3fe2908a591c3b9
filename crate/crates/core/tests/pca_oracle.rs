//! Gram-matrix PCA against a direct eigendecomposition of the d x d
//! covariance matrix computed with nalgebra.

use gcims_core::features::{pca_fit, pca_transform, FeatureMatrix};
use gcims_core::rng::rng_from;
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::Rng;

struct Direct {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

fn covariance_pca(x: &Array2<f64>) -> Direct {
    let (n, d) = x.dim();
    let m = DMatrix::from_fn(n, d, |i, j| x[[i, j]]);
    let mean = m.row_mean();
    let c = DMatrix::from_fn(n, d, |i, j| m[(i, j)] - mean[j]);
    let cov = c.transpose() * &c / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    Direct {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect(),
    }
}

fn centered(x: &Array2<f64>) -> Array2<f64> {
    x - &x.mean_axis(ndarray::Axis(0)).unwrap()
}

#[test]
fn matches_covariance_eigendecomposition() {
    for trial in 0..50u64 {
        let mut rng = rng_from(2024, &[trial]);
        let n = rng.random_range(3..=20);
        let d = rng.random_range(2..=100);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-3.0..3.0));
        let rank = (n - 1).min(d);
        let k = rng.random_range(1..=rank);
        let model = pca_fit(&x, k).unwrap();
        assert_eq!(model.n_components(), k);

        let direct = covariance_pca(&x);
        let scale = direct.values[0];
        let xc = centered(&x);
        let scores = model.transform(&x).unwrap();
        for a in 0..k {
            let lam = model.explained_variance[a];
            assert!(
                (lam - direct.values[a]).abs() <= 1e-8 * scale,
                "trial {trial} component {a}: {lam} vs {}",
                direct.values[a]
            );
            let v = ndarray::Array1::from(direct.vectors[a].clone());
            let oracle = xc.dot(&v);
            let ours = scores.column(a);
            let sign = if oracle.dot(&ours) < 0.0 { -1.0 } else { 1.0 };
            let err = (&oracle * sign - ours).mapv(f64::abs).fold(0.0f64, |m, &e| m.max(e));
            let norm = oracle.mapv(f64::abs).fold(0.0f64, |m, &e| m.max(e));
            assert!(err <= 1e-8 * norm, "trial {trial} component {a}: score error {err} vs {norm}");
        }
    }
}

#[test]
fn components_are_orthonormal_and_sorted() {
    let mut rng = rng_from(5, &[]);
    let x = Array2::from_shape_fn((15, 40), |_| rng.random_range(0.0..1.0));
    let m = pca_fit(&x, 14).unwrap();
    let g = m.components.dot(&m.components.t());
    for i in 0..14 {
        for j in 0..14 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g[[i, j]] - want).abs() < 1e-8);
        }
    }
    assert!(m.explained_variance.windows(2).into_iter().all(|w| w[0] >= w[1]));
    assert!(m.explained_variance_ratio.sum() <= 1.0 + 1e-12);
}

#[test]
fn clamps_to_rank_and_reconstructs() {
    let mut rng = rng_from(6, &[]);
    let x = Array2::from_shape_fn((8, 30), |_| rng.random_range(-1.0..1.0));
    let m = pca_fit(&x, 304).unwrap();
    assert_eq!(m.n_components(), 7);
    assert!(m.was_clamped());
    let xc = centered(&x);
    let back = xc.dot(&m.components.t()).dot(&m.components);
    let err = (&back - &xc).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
    assert!(err < 1e-6 * xc.mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b)));
}

#[test]
fn training_scores_carry_explained_variance() {
    let mut rng = rng_from(7, &[]);
    let x = Array2::from_shape_fn((12, 25), |_| rng.random_range(-2.0..2.0));
    let m = pca_fit(&x, 5).unwrap();
    let fm = FeatureMatrix::from_values(x.clone()).unwrap();
    let scores = pca_transform(&m, &fm).unwrap();
    assert_eq!(scores.feature_names()[0], "PC1");
    for a in 0..5 {
        let col = scores.values().column(a);
        let var = col.mapv(|v| v * v).sum() / 11.0;
        assert!((var - m.explained_variance[a]).abs() < 1e-8 * m.explained_variance[0]);
    }
    let mean = x.mean_axis(ndarray::Axis(0)).unwrap().insert_axis(ndarray::Axis(0));
    assert!(m.transform(&mean).unwrap().iter().all(|v| v.abs() < 1e-10));
}
