use gcims_core::eval::{evaluate_all, AlgorithmPlan, EvalOptions};
use gcims_core::features::FeatureConfig;
use gcims_core::io::{validate_measurement, validate_record};
use gcims_core::preprocess::block_mean;
use gcims_core::synth::{generate, reference_benchmark};
use gcims_core::{ClassifierKind, Dataset, Error, PreprocessConfig, SampleLabel, SynthConfig};
use ndarray::Array1;

fn binned(ds: &Dataset) -> (Vec<Array1<f64>>, Vec<SampleLabel>) {
    let x = ds
        .ordered_spectra()
        .map(|s| Array1::from_iter(block_mean(s.intensity(), 8, 8)))
        .collect();
    (x, ds.labels().unwrap())
}

/// Leave-one-out nearest class centroid, an oracle entirely separate from
/// the library's classifiers.
fn loo_nearest_centroid(x: &[Array1<f64>], y: &[SampleLabel]) -> f64 {
    let mut hits = 0;
    for i in 0..x.len() {
        let mut sums = [Array1::zeros(x[0].len()), Array1::zeros(x[0].len())];
        let mut n = [0.0; 2];
        for j in (0..x.len()).filter(|&j| j != i) {
            let c = y[j].is_infected() as usize;
            sums[c] += &x[j];
            n[c] += 1.0;
        }
        let d = |c: usize| (&sums[c] / n[c] - &x[i]).mapv(|v| v * v).sum();
        hits += ((d(1) < d(0)) == y[i].is_infected()) as usize;
    }
    hits as f64 / x.len() as f64
}

#[test]
fn strong_separation_is_linearly_visible() {
    let ds = generate(&SynthConfig {
        separation: 2.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let (x, y) = binned(&ds);
    let acc = loo_nearest_centroid(&x, &y);
    assert!(acc >= 0.9, "nearest-centroid LOO accuracy {acc}");
}

#[test]
fn controls_do_not_depend_on_separation() {
    let at = |sep: f64| {
        generate(&SynthConfig {
            separation: sep,
            n_samples: 40,
            ..SynthConfig::default()
        })
        .unwrap()
    };
    let (a, b) = (at(0.0), at(2.0));
    let controls = |ds: &Dataset| -> Vec<ndarray::Array2<f64>> {
        ds.ordered_spectra()
            .filter(|s| s.label() == Some(SampleLabel::NotInfected))
            .map(|s| s.intensity().clone())
            .collect()
    };
    let (ca, cb) = (controls(&a), controls(&b));
    assert_eq!(ca.len(), 20);
    let mean = |v: &[ndarray::Array2<f64>]| v.iter().fold(ndarray::Array2::zeros(v[0].dim()), |acc, m| acc + m) / v.len() as f64;
    let diff = (mean(&ca) - mean(&cb)).mapv(f64::abs).fold(0.0f64, |m, &d| m.max(d));
    assert!(diff <= 1e-9, "per-cell mean difference {diff}");
}

#[test]
fn no_separation_gives_chance_auc() {
    let ds = generate(&SynthConfig {
        separation: 0.0,
        ..SynthConfig::default()
    })
    .unwrap();
    let plans: Vec<AlgorithmPlan> = ClassifierKind::ALL.iter().map(|&k| AlgorithmPlan::standard(k, None)).collect();
    let report = evaluate_all(
        &ds,
        &PreprocessConfig::standard(),
        &FeatureConfig::default(),
        &plans,
        &EvalOptions::default(),
        42,
    )
    .unwrap();
    for row in &report.rows {
        let auc = row.test.roc_auc.unwrap();
        assert!((0.3..=0.7).contains(&auc), "{}: AUC {auc}", row.algorithm);
    }
}

#[test]
fn reference_benchmark_shape() {
    let (ds, bounds) = reference_benchmark();
    assert_eq!(ds.len(), 76);
    let y = ds.labels().unwrap();
    assert_eq!(y.iter().filter(|l| l.is_infected()).count(), 38);
    assert_eq!(bounds.min_accuracy, 0.75);
    assert!(bounds.must_match_tree);
    for r in ds.records() {
        assert!(validate_record(r).passed(), "{}", r.sample_id);
        let s = ds.spectrum(&r.sample_id).unwrap();
        assert_eq!(s.shape(), (315, 408));
        assert!(validate_measurement(s).passed(), "{}", r.sample_id);
    }
}

#[test]
fn invalid_configs() {
    for cfg in [
        SynthConfig { n_samples: 0, ..SynthConfig::default() },
        SynthConfig { separation: -1.0, ..SynthConfig::default() },
        SynthConfig { noise_sigma: f64::NAN, ..SynthConfig::default() },
        SynthConfig { infected_fraction: 1.5, ..SynthConfig::default() },
        SynthConfig { rows: 4, ..SynthConfig::default() },
    ] {
        assert!(matches!(generate(&cfg), Err(Error::ConfigInvalid(_))), "{cfg:?}");
    }
}
