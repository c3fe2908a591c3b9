//! Seeded synthetic GC-IMS datasets.
//!
//! Every spectrum is a sum of axis-aligned 2D Gaussian peaks on a smooth,
//! positive background with white Gaussian noise. A fixed set of common
//! peaks appears in every sample with small amplitude and position jitter;
//! biomarker peaks are added to infected samples only, scaled by the
//! separation factor. All random draws are independent of the separation
//! factor, so non-infected spectra are identical for any separation.
//!
//! Intensities are rounded to `f32` so that a generated dataset written to
//! disk reads back unchanged.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from, Rng};
use crate::spectrum::{Axis, AxisKind, Dataset, ImsSpectrum, SampleLabel, SampleRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_samples: usize,
    /// Retention points.
    pub rows: usize,
    /// Drift points.
    pub cols: usize,
    pub n_common_peaks: usize,
    pub n_biomarker_peaks: usize,
    /// Multiplier on biomarker amplitude in infected samples.
    pub separation: f64,
    /// Noise standard deviation as a fraction of the largest common peak.
    pub noise_sigma: f64,
    /// Amplitude of the smooth linear background drift.
    pub baseline_drift: f64,
    /// Constant background level under every spectrum.
    pub background: f64,
    /// Mean biomarker peak height at separation 1, relative to the largest
    /// common peak.
    pub biomarker_amplitude: f64,
    pub infected_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_samples: 76,
            rows: 315,
            cols: 408,
            n_common_peaks: 12,
            n_biomarker_peaks: 3,
            separation: 1.0,
            noise_sigma: 0.02,
            baseline_drift: 0.05,
            background: 0.06,
            biomarker_amplitude: 0.25,
            infected_fraction: 0.5,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn check(&self) -> Result<()> {
        let fail = |m: String| Err(Error::ConfigInvalid(m));
        if self.n_samples == 0 {
            return fail("n_samples must be >= 1".into());
        }
        if self.rows < 8 || self.cols < 8 {
            return fail(format!("grid {}x{} is smaller than 8x8", self.rows, self.cols));
        }
        for (name, v) in [
            ("separation", self.separation),
            ("noise_sigma", self.noise_sigma),
            ("baseline_drift", self.baseline_drift),
            ("background", self.background),
            ("biomarker_amplitude", self.biomarker_amplitude),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return fail(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.infected_fraction) {
            return fail(format!("infected_fraction {} outside [0, 1]", self.infected_fraction));
        }
        Ok(())
    }

    pub fn drift_axis(&self) -> Axis {
        Axis {
            name: AxisKind::DriftTime,
            start: 6.0,
            step: 0.02,
            count: self.cols,
        }
    }

    pub fn retention_axis(&self) -> Axis {
        Axis {
            name: AxisKind::RetentionTime,
            start: 10.0,
            step: 2.0,
            count: self.rows,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Peak {
    row: f64,
    col: f64,
    sigma_row: f64,
    sigma_col: f64,
    amplitude: f64,
}

fn draw_peak(rng: &mut Rng, rows: usize, cols: usize, amplitude: f64) -> Peak {
    let (r, c) = (rows as f64, cols as f64);
    Peak {
        row: rng.random_range(0.1 * r..0.9 * r),
        col: rng.random_range(0.1 * c..0.9 * c),
        sigma_row: rng.random_range(0.008..0.02) * r,
        sigma_col: rng.random_range(0.005..0.012) * c,
        amplitude,
    }
}

/// Adds `peak` into `m`, evaluated out to 4 sigma on each axis.
fn add_peak(m: &mut Array2<f64>, p: &Peak) {
    let (rows, cols) = m.dim();
    let span = |center: f64, sigma: f64, n: usize| {
        let lo = (center - 4.0 * sigma).floor().max(0.0) as usize;
        let hi = ((center + 4.0 * sigma).ceil() as usize).min(n - 1);
        (lo, hi)
    };
    let (r0, r1) = span(p.row, p.sigma_row, rows);
    let (c0, c1) = span(p.col, p.sigma_col, cols);
    let profile = |lo: usize, hi: usize, center: f64, sigma: f64| -> Vec<f64> {
        (lo..=hi)
            .map(|i| (-(i as f64 - center).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect()
    };
    let pr = profile(r0, r1, p.row, p.sigma_row);
    let pc = profile(c0, c1, p.col, p.sigma_col);
    for (i, wr) in pr.iter().enumerate() {
        let mut row = m.row_mut(r0 + i);
        for (j, wc) in pc.iter().enumerate() {
            row[c0 + j] += p.amplitude * wr * wc;
        }
    }
}

/// Splits `n` into (infected, not infected) by largest remainder; an exact
/// tie in remainders goes to not infected.
pub fn class_counts(n: usize, infected_fraction: f64) -> (usize, usize) {
    let want = n as f64 * infected_fraction;
    let base = want.floor() as usize;
    let rem_inf = want - base as f64;
    let rem_not = (n as f64 - want) - (n - base) as f64 + 1.0;
    let infected = if base < n && rem_inf > 0.0 && rem_inf > rem_not { base + 1 } else { base };
    (infected, n - infected)
}

pub fn generate(config: &SynthConfig) -> Result<Dataset> {
    config.check()?;
    let SynthConfig { rows, cols, n_samples: n, .. } = *config;

    let mut layout = rng_from(config.seed, &[0]);
    let common: Vec<Peak> = (0..config.n_common_peaks)
        .map(|k| {
            let amp = if k == 0 { 1.0 } else { layout.random_range(0.2..1.0) };
            draw_peak(&mut layout, rows, cols, amp)
        })
        .collect();
    let biomarkers: Vec<Peak> = (0..config.n_biomarker_peaks)
        .map(|_| {
            let amp = config.biomarker_amplitude * layout.random_range(0.7..1.3);
            draw_peak(&mut layout, rows, cols, amp)
        })
        .collect();

    let (n_infected, _) = class_counts(n, config.infected_fraction);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from(config.seed, &[3]));
    let mut infected = vec![false; n];
    for &i in &order[..n_infected] {
        infected[i] = true;
    }

    let width = n.to_string().len().max(3);
    let ids: Vec<String> = (0..n).map(|i| format!("S{:0width$}", i + 1)).collect();
    let noise = Normal::new(0.0, config.noise_sigma.max(f64::MIN_POSITIVE)).expect("sigma >= 0");
    let drift = config.drift_axis();
    let retention = config.retention_axis();

    let spectra: Vec<ImsSpectrum> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(config.seed, &[1, i as u64]);
            let mut m = Array2::from_elem((rows, cols), config.background);
            let jitter = |rng: &mut Rng, p: &Peak, amp_lo: f64, amp_hi: f64| Peak {
                row: p.row + rng.random_range(-1.0..=1.0),
                col: p.col + rng.random_range(-1.0..=1.0),
                amplitude: p.amplitude * rng.random_range(amp_lo..=amp_hi),
                ..*p
            };
            for p in &common {
                add_peak(&mut m, &jitter(&mut rng, p, 0.9, 1.1));
            }
            // drawn for every sample so the stream does not depend on the label
            let markers: Vec<Peak> = biomarkers
                .iter()
                .map(|p| jitter(&mut rng, p, 0.5, 1.5))
                .collect();
            if infected[i] {
                for mut p in markers {
                    p.amplitude *= config.separation;
                    add_peak(&mut m, &p);
                }
            }
            let (b0, b1, b2): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
            for ((r, c), v) in m.indexed_iter_mut() {
                let u = r as f64 / (rows - 1) as f64;
                let w = c as f64 / (cols - 1) as f64;
                *v += config.baseline_drift * (b0 + b1 * u + b2 * w) / 3.0;
                if config.noise_sigma > 0.0 {
                    *v += noise.sample(&mut rng);
                }
                *v = *v as f32 as f64;
            }
            ImsSpectrum::new(ids[i].clone(), drift.clone(), retention.clone(), m)
                .expect("shape follows config")
                .with_label(Some(SampleLabel::from_infected(infected[i])))
        })
        .collect();

    let start = NaiveDate::from_ymd_opt(2024, 1, 1).expect("valid date");
    let records: Vec<SampleRecord> = (0..n)
        .map(|i| {
            let mut rng = rng_from(config.seed, &[2, i as u64]);
            SampleRecord {
                sample_id: ids[i].clone(),
                age: rng.random_range(18..=99),
                sex: if i % 2 == 0 { "male" } else { "female" }.to_string(),
                site: format!("site-{}", i % 3 + 1),
                collected_on: (start + Days::new(i as u64)).format("%Y-%m-%d").to_string(),
                label: Some(SampleLabel::from_infected(infected[i])),
            }
        })
        .collect();
    let spectra: BTreeMap<String, ImsSpectrum> = spectra
        .into_iter()
        .map(|s| (s.sample_id().to_string(), s))
        .collect();
    Dataset::new(records, spectra)
}

/// Pass bounds for the synthetic analogue of the five-classifier comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkBounds {
    /// Minimum held-out accuracy for random forest, SVM and PLS-DA.
    pub min_accuracy: f64,
    /// Each of those three must also reach the decision tree's accuracy.
    pub must_match_tree: bool,
    pub max_runtime_secs: u64,
}

pub const REFERENCE_SEED: u64 = 42;

pub fn reference_config() -> SynthConfig {
    SynthConfig {
        seed: REFERENCE_SEED,
        ..SynthConfig::default()
    }
}

/// The fixed benchmark: defaults, seed 42, separation 1.
pub fn reference_benchmark() -> (Dataset, BenchmarkBounds) {
    let ds = generate(&reference_config()).expect("reference config is valid");
    (
        ds,
        BenchmarkBounds {
            min_accuracy: 0.75,
            must_match_tree: true,
            max_runtime_secs: 300,
        },
    )
}
