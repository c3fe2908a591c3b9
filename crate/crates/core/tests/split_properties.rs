use gcims_core::eval::{stratified_kfold, stratified_split, test_counts};
use gcims_core::rng::rng_from;
use gcims_core::{Error, SampleLabel};
use rand::Rng;

fn infected(y: &[SampleLabel], idx: &[usize]) -> usize {
    idx.iter().filter(|&&i| y[i].is_infected()).count()
}

#[test]
fn random_label_vectors() {
    for trial in 0..1000u64 {
        let mut rng = rng_from(99, &[trial]);
        let n = rng.random_range(4..=120);
        let mut y: Vec<SampleLabel> = (0..n).map(|_| SampleLabel::from_infected(rng.random())).collect();
        // both classes need two members
        y[0] = SampleLabel::Infected;
        y[1] = SampleLabel::Infected;
        y[2] = SampleLabel::NotInfected;
        y[3] = SampleLabel::NotInfected;
        let n_inf = infected(&y, &(0..n).collect::<Vec<_>>());
        let f = rng.random_range(0.05..0.95);
        let plan = stratified_split(&y, f, trial).unwrap();

        let mut all: Vec<usize> = plan.train_indices.iter().chain(&plan.test_indices).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>(), "trial {trial}: not a partition");

        let [tn, ti] = test_counts([n - n_inf, n_inf], f).unwrap();
        assert_eq!(infected(&y, &plan.test_indices), ti);
        assert_eq!(plan.test_indices.len(), tn + ti);
        // each class keeps members on both sides
        assert!(ti >= 1 && ti < n_inf && tn >= 1 && tn < n - n_inf);
        // per-class share is within one of the exact share
        assert!((ti as f64 - n_inf as f64 * f).abs() < 1.0 + 1e-9 || ti == 1 || ti == n_inf - 1);

        let k = rng.random_range(2..=n.min(10));
        let folds = stratified_kfold(&y, k, trial).unwrap();
        let mut seen = vec![0; n];
        let mut sizes = Vec::new();
        let mut inf_sizes = Vec::new();
        for i in 0..k {
            let (train, val) = folds.split(i);
            assert_eq!(train.len() + val.len(), n);
            for &v in &val {
                seen[v] += 1;
            }
            sizes.push(val.len());
            inf_sizes.push(infected(&y, &val));
        }
        assert!(seen.iter().all(|&c| c == 1), "trial {trial}: fold cover");
        let spread = |v: &[usize]| v.iter().max().unwrap() - v.iter().min().unwrap();
        assert!(spread(&sizes) <= 1);
        assert!(spread(&inf_sizes) <= 1);
    }
}

#[test]
fn seventy_six_in_five_folds() {
    let y: Vec<SampleLabel> = (0..76).map(|i| SampleLabel::from_infected(i % 2 == 1)).collect();
    let folds = stratified_kfold(&y, 5, 42).unwrap();
    let mut sizes: Vec<usize> = (0..5).map(|i| folds.split(i).1.len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![15, 15, 15, 15, 16]);
}

#[test]
fn forty_thirty_six_at_a_fifth() {
    let mut y = vec![SampleLabel::Infected; 40];
    y.extend(vec![SampleLabel::NotInfected; 36]);
    let plan = stratified_split(&y, 0.2, 1).unwrap();
    assert_eq!(infected(&y, &plan.test_indices), 8);
    assert_eq!(plan.test_indices.len(), 15);
}

#[test]
fn infeasible_requests() {
    let y: Vec<SampleLabel> = (0..10).map(|i| SampleLabel::from_infected(i % 2 == 0)).collect();
    assert!(matches!(stratified_kfold(&y, 11, 0), Err(Error::KTooLarge { k: 11, n: 10 })));
    assert!(matches!(stratified_kfold(&y, 1, 0), Err(Error::ConfigInvalid(_))));
    assert!(matches!(stratified_split(&y, 0.0, 0), Err(Error::ConfigInvalid(_))));
    let lone = [SampleLabel::Infected, SampleLabel::NotInfected, SampleLabel::NotInfected];
    assert!(matches!(stratified_split(&lone, 0.5, 0), Err(Error::ClassTooSmall(_))));
}
