//! Per-spectrum preprocessing: impulse removal, Gaussian smoothing, per-row
//! baseline subtraction, normalization and block binning.
//!
//! Steps compose in any order through [`PreprocessConfig`], which also has a
//! line-based text form:
//!
//! ```text
//! # applied top to bottom
//! despike = 3
//! smooth = 1.0
//! baseline = 10
//! normalize = tic
//! bin = 3, 4
//! ```

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{Axis, ImsSpectrum};

/// A cell is an impulse when it exceeds its neighborhood median by more than
/// this many neighborhood standard deviations.
pub const DESPIKE_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    /// Total ion current: cells sum to one.
    Tic,
    /// Largest cell becomes one.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Despike { window: usize },
    Smooth { sigma: f64 },
    Baseline { percentile: f64 },
    Normalize { mode: NormalizeMode },
    Bin { rows: usize, cols: usize },
}

impl Step {
    pub fn check(&self) -> Result<()> {
        match *self {
            Step::Despike { window } if window < 3 || window % 2 == 0 => Err(Error::config(
                format!("despike window must be odd and >= 3, got {window}"),
            )),
            Step::Smooth { sigma } if !(sigma.is_finite() && sigma > 0.0) => {
                Err(Error::config(format!("smooth sigma must be positive, got {sigma}")))
            }
            Step::Baseline { percentile } if !(0.0..=50.0).contains(&percentile) => Err(
                Error::config(format!("baseline percentile must be in [0, 50], got {percentile}")),
            ),
            Step::Bin { rows, cols } if rows == 0 || cols == 0 => {
                Err(Error::config("bin factors must be >= 1"))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, spectrum: &ImsSpectrum) -> Result<ImsSpectrum> {
        match *self {
            Step::Despike { window } => despike(spectrum, window),
            Step::Smooth { sigma } => smooth(spectrum, sigma),
            Step::Baseline { percentile } => baseline(spectrum, percentile),
            Step::Normalize { mode } => normalize(spectrum, mode),
            Step::Bin { rows, cols } => bin(spectrum, rows, cols),
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Despike { window } => write!(f, "despike = {window}"),
            Step::Smooth { sigma } => write!(f, "smooth = {sigma:?}"),
            Step::Baseline { percentile } => write!(f, "baseline = {percentile:?}"),
            Step::Normalize { mode: NormalizeMode::Tic } => write!(f, "normalize = tic"),
            Step::Normalize { mode: NormalizeMode::Max } => write!(f, "normalize = max"),
            Step::Bin { rows, cols } => write!(f, "bin = {rows}, {cols}"),
        }
    }
}

impl Step {
    /// Parses one `key = value` pair; `None` when the key is not a step.
    pub fn from_key_value(key: &str, value: &str) -> Option<Result<Step>> {
        let bad = |what: &str| Error::config(format!("{key}: cannot parse {value:?} as {what}"));
        let step = match key {
            "despike" => value.parse().map(|window| Step::Despike { window }).map_err(|_| bad("window")),
            "smooth" => value.parse().map(|sigma| Step::Smooth { sigma }).map_err(|_| bad("sigma")),
            "baseline" => value
                .parse()
                .map(|percentile| Step::Baseline { percentile })
                .map_err(|_| bad("percentile")),
            "normalize" => match value {
                "tic" => Ok(Step::Normalize { mode: NormalizeMode::Tic }),
                "max" => Ok(Step::Normalize { mode: NormalizeMode::Max }),
                _ => Err(bad("tic|max")),
            },
            "bin" => {
                let parts: Vec<_> = value.split([',', 'x']).map(str::trim).collect();
                match parts.as_slice() {
                    [r, c] => match (r.parse(), c.parse()) {
                        (Ok(rows), Ok(cols)) => Ok(Step::Bin { rows, cols }),
                        _ => Err(bad("two factors")),
                    },
                    [f] => f.parse().map(|k| Step::Bin { rows: k, cols: k }).map_err(|_| bad("factor")),
                    _ => Err(bad("two factors")),
                }
            }
            _ => return None,
        };
        Some(step.and_then(|s| s.check().map(|_| s)))
    }
}

/// Ordered list of preprocessing steps; empty means identity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub steps: Vec<Step>,
}

impl PreprocessConfig {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        for s in &steps {
            s.check()?;
        }
        Ok(PreprocessConfig { steps })
    }

    /// despike(3), smooth(1.0), baseline(10), normalize(tic), bin(3, 4).
    pub fn standard() -> Self {
        PreprocessConfig {
            steps: vec![
                Step::Despike { window: 3 },
                Step::Smooth { sigma: 1.0 },
                Step::Baseline { percentile: 10.0 },
                Step::Normalize { mode: NormalizeMode::Tic },
                Step::Bin { rows: 3, cols: 4 },
            ],
        }
    }
}

impl fmt::Display for PreprocessConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for PreprocessConfig {
    type Err = Error;

    /// Blank lines and `#` comments are skipped; unknown keys are an error.
    fn from_str(text: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected key = value", n + 1)))?;
            match Step::from_key_value(key.trim(), value.trim()) {
                Some(step) => steps.push(step.map_err(|e| Error::config(format!("line {}: {e}", n + 1)))?),
                None => {
                    return Err(Error::config(format!(
                        "line {}: unknown step {:?}",
                        n + 1,
                        key.trim()
                    )))
                }
            }
        }
        Ok(PreprocessConfig { steps })
    }
}

pub fn run_pipeline(spectrum: &ImsSpectrum, config: &PreprocessConfig) -> Result<ImsSpectrum> {
    let mut current = spectrum.clone();
    for step in &config.steps {
        step.check()?;
        current = step.apply(&current)?;
    }
    Ok(current)
}

fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Replaces isolated positive impulses with the median of their
/// `window x window` neighborhood. Neighborhood statistics exclude the cell
/// itself and are clipped at the matrix edges.
pub fn despike(spectrum: &ImsSpectrum, window: usize) -> Result<ImsSpectrum> {
    Step::Despike { window }.check()?;
    let data = spectrum.intensity();
    let (rows, cols) = data.dim();
    let min_dim = rows.min(cols);
    if window > min_dim {
        return Err(Error::WindowTooLarge { window, min_dim });
    }
    let half = window / 2;
    let mut out = data.clone();
    let mut neighbors = Vec::with_capacity(window * window);
    for r in 0..rows {
        for c in 0..cols {
            neighbors.clear();
            for rr in r.saturating_sub(half)..(r + half + 1).min(rows) {
                for cc in c.saturating_sub(half)..(c + half + 1).min(cols) {
                    if rr != r || cc != c {
                        neighbors.push(data[[rr, cc]]);
                    }
                }
            }
            let n = neighbors.len() as f64;
            let mean = neighbors.iter().sum::<f64>() / n;
            let var = neighbors.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let median = median_in_place(&mut neighbors);
            if data[[r, c]] - median > DESPIKE_SIGMAS * var.sqrt() {
                out[[r, c]] = median;
            }
        }
    }
    Ok(spectrum.with_intensity(out))
}

/// Normalized Gaussian weights for offsets `-radius..=radius`,
/// `radius = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let w: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Mirror index with the edge sample repeated (`d c b a | a b c d`).
fn reflect(i: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = i.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

fn convolve_lines(data: &Array2<f64>, kernel: &[f64], along_cols: bool) -> Array2<f64> {
    let (rows, cols) = data.dim();
    let radius = (kernel.len() / 2) as i64;
    let mut out = Array2::zeros((rows, cols));
    let (outer, inner) = if along_cols { (rows, cols) } else { (cols, rows) };
    for o in 0..outer {
        for i in 0..inner {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                let j = reflect(i as i64 + k as i64 - radius, inner);
                acc += w * if along_cols { data[[o, j]] } else { data[[j, o]] };
            }
            if along_cols {
                out[[o, i]] = acc;
            } else {
                out[[i, o]] = acc;
            }
        }
    }
    out
}

/// Separable 2D Gaussian blur with reflected edges.
pub fn smooth(spectrum: &ImsSpectrum, sigma: f64) -> Result<ImsSpectrum> {
    Step::Smooth { sigma }.check()?;
    let kernel = gaussian_kernel(sigma);
    let pass = convolve_lines(spectrum.intensity(), &kernel, true);
    Ok(spectrum.with_intensity(convolve_lines(&pass, &kernel, false)))
}

/// Nearest-rank percentile: the smallest value with at least `p`% of the
/// sample at or below it. `p = 0` gives the minimum.
pub fn nearest_rank_percentile(values: &[f64], percentile: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((percentile / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Subtracts each retention row's percentile from that row.
pub fn baseline(spectrum: &ImsSpectrum, percentile: f64) -> Result<ImsSpectrum> {
    Step::Baseline { percentile }.check()?;
    let mut out = spectrum.intensity().clone();
    for mut row in out.rows_mut() {
        let level = nearest_rank_percentile(row.as_slice().expect("standard layout"), percentile);
        row.mapv_inplace(|v| v - level);
    }
    Ok(spectrum.with_intensity(out))
}

pub fn normalize(spectrum: &ImsSpectrum, mode: NormalizeMode) -> Result<ImsSpectrum> {
    let data = spectrum.intensity();
    let degenerate = || Error::DegenerateSpectrum(spectrum.sample_id().to_string());
    if !data.iter().any(|&v| v > 0.0) {
        return Err(degenerate());
    }
    let scale = match mode {
        NormalizeMode::Tic => data.sum(),
        NormalizeMode::Max => data.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    if !(scale.is_finite() && scale > 0.0) {
        return Err(degenerate());
    }
    Ok(spectrum.with_intensity(data.mapv(|v| v / scale)))
}

/// Non-overlapping block means; trailing partial blocks average over the
/// cells they actually contain.
pub fn block_mean(data: &Array2<f64>, factor_rows: usize, factor_cols: usize) -> Array2<f64> {
    let (rows, cols) = data.dim();
    let out_rows = rows.div_ceil(factor_rows);
    let out_cols = cols.div_ceil(factor_cols);
    Array2::from_shape_fn((out_rows, out_cols), |(i, j)| {
        let r0 = i * factor_rows;
        let c0 = j * factor_cols;
        let block = data.slice(ndarray::s![
            r0..(r0 + factor_rows).min(rows),
            c0..(c0 + factor_cols).min(cols)
        ]);
        block.sum() / block.len() as f64
    })
}

/// Block-mean pooling. Axis steps scale by the factor and counts by ceiling
/// division; the result must keep at least two points per axis.
pub fn bin(spectrum: &ImsSpectrum, factor_rows: usize, factor_cols: usize) -> Result<ImsSpectrum> {
    Step::Bin {
        rows: factor_rows,
        cols: factor_cols,
    }
    .check()?;
    if factor_rows == 1 && factor_cols == 1 {
        return Ok(spectrum.clone());
    }
    let scale = |axis: &Axis, f: usize| -> Result<Axis> {
        let count = axis.count.div_ceil(f);
        if count < 2 {
            return Err(Error::BinTooCoarse(format!(
                "{:?}: {} points binned by {f}",
                axis.name, axis.count
            )));
        }
        Axis::new(axis.name, axis.start, axis.step * f as f64, count)
    };
    let drift = scale(spectrum.drift_axis(), factor_cols)?;
    let retention = scale(spectrum.retention_axis(), factor_rows)?;
    let data = block_mean(spectrum.intensity(), factor_rows, factor_cols);
    spectrum.replace_axes(drift, retention, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::AxisKind;
    use ndarray::array;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn spectrum(data: Array2<f64>) -> ImsSpectrum {
        let (rows, cols) = data.dim();
        ImsSpectrum::new(
            "t",
            Axis::new(AxisKind::DriftTime, 5.0, 0.02, cols).unwrap(),
            Axis::new(AxisKind::RetentionTime, 0.0, 2.0, rows).unwrap(),
            data,
        )
        .unwrap()
    }

    fn gaussian_peak(rows: usize, cols: usize, amp: f64, sigma: f64) -> Array2<f64> {
        let (cr, cc) = (rows as f64 / 2.0, cols as f64 / 2.0);
        Array2::from_shape_fn((rows, cols), |(r, c)| {
            let d2 = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2);
            amp * (-d2 / (2.0 * sigma * sigma)).exp()
        })
    }

    #[test]
    fn despike_removes_isolated_impulse() {
        let mut m = Array2::zeros((7, 7));
        m[[3, 3]] = 100.0;
        let out = despike(&spectrum(m), 3).unwrap();
        assert!(out.intensity().iter().all(|&v| v == 0.0));
        // impulse in a corner: 3 neighbors only
        let mut m = Array2::zeros((5, 5));
        m[[0, 0]] = 100.0;
        assert_eq!(despike(&spectrum(m), 3).unwrap().intensity()[[0, 0]], 0.0);
    }

    #[test]
    fn despike_constant_unchanged_and_window_limits() {
        let s = spectrum(Array2::from_elem((4, 6), 3.5));
        assert_eq!(despike(&s, 3).unwrap(), s);
        assert!(matches!(despike(&s, 5), Err(Error::WindowTooLarge { window: 5, min_dim: 4 })));
        assert!(despike(&s, 4).is_err());
    }

    /// Brute-force neighborhood statistics, written independently of the
    /// implementation: collect, sort, take the middle, compare.
    fn impulse_cells(m: &Array2<f64>, window: usize) -> Vec<(usize, usize)> {
        let (rows, cols) = m.dim();
        let h = (window / 2) as i64;
        let mut hits = Vec::new();
        for r in 0..rows as i64 {
            for c in 0..cols as i64 {
                let mut nb = Vec::new();
                for dr in -h..=h {
                    for dc in -h..=h {
                        let (rr, cc) = (r + dr, c + dc);
                        if (dr, dc) != (0, 0) && rr >= 0 && cc >= 0 && rr < rows as i64 && cc < cols as i64 {
                            nb.push(m[[rr as usize, cc as usize]]);
                        }
                    }
                }
                nb.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let k = nb.len();
                let med = if k % 2 == 1 { nb[k / 2] } else { (nb[k / 2 - 1] + nb[k / 2]) / 2.0 };
                let mean = nb.iter().sum::<f64>() / k as f64;
                let sd = (nb.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / k as f64).sqrt();
                if m[[r as usize, c as usize]] - med > 5.0 * sd {
                    hits.push((r as usize, c as usize));
                }
            }
        }
        hits
    }

    #[test]
    fn despike_leaves_smooth_peaks() {
        for sigma in [1.0, 1.5, 2.0, 4.0] {
            let m = gaussian_peak(21, 25, 7.0, sigma);
            assert!(impulse_cells(&m, 3).is_empty(), "oracle flags sigma {sigma}");
            let s = spectrum(m);
            assert_eq!(despike(&s, 3).unwrap(), s);
        }
    }

    #[test]
    fn despike_matches_oracle_on_noise_with_spikes() {
        let mut rng = crate::rng::rng_from(3, &[]);
        let mut m = Array2::from_shape_fn((15, 17), |_| rng.random::<f64>());
        m[[4, 5]] = 50.0;
        m[[10, 1]] = 80.0;
        let hits = impulse_cells(&m, 3);
        assert!(hits.contains(&(4, 5)) && hits.contains(&(10, 1)));
        let out = despike(&spectrum(m.clone()), 3).unwrap();
        for r in 0..15 {
            for c in 0..17 {
                let changed = out.intensity()[[r, c]] != m[[r, c]];
                assert_eq!(changed, hits.contains(&(r, c)), "cell ({r},{c})");
            }
        }
    }

    #[test]
    fn smooth_constant_and_impulse() {
        let s = spectrum(Array2::from_elem((9, 11), 2.25));
        let out = smooth(&s, 1.3).unwrap();
        for &v in out.intensity() {
            assert!((v - 2.25).abs() < 1e-9);
        }

        let mut m = Array2::zeros((15, 15));
        m[[7, 7]] = 1.0;
        let out = smooth(&spectrum(m), 1.0).unwrap();
        // direct evaluation of the truncated, normalized 2D kernel at its center
        let norm: f64 = (-3i32..=3).map(|i| (-(i * i) as f64 / 2.0).exp()).sum();
        let center = 1.0 / (norm * norm);
        assert!((out.intensity()[[7, 7]] - center).abs() < 1e-12);
        let off = (-0.5f64).exp() / (norm * norm);
        assert!((out.intensity()[[7, 8]] - off).abs() < 1e-12);
        assert!((out.intensity().sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_reduces_noise_variance_and_keeps_mass() {
        let mut rng = crate::rng::rng_from(11, &[]);
        let m = Array2::from_shape_fn((40, 50), |_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            5.0 + z
        });
        let var = |a: &Array2<f64>| {
            let mean = a.mean().unwrap();
            a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / a.len() as f64
        };
        let s = spectrum(m.clone());
        let out = smooth(&s, 1.5).unwrap();
        assert!(var(out.intensity()) < var(&m));
        let rel = (out.intensity().sum() - m.sum()).abs() / m.sum();
        assert!(rel < 1e-3);
    }

    #[test]
    fn reflect_indexing() {
        let idx: Vec<usize> = (-4..8).map(|i| reflect(i, 4)).collect();
        assert_eq!(idx, [3, 2, 1, 0, 0, 1, 2, 3, 3, 2, 1, 0]);
    }

    #[test]
    fn baseline_row_percentile() {
        let s = spectrum(array![[5.0, 5.0, 6.0, 5.0, 9.0, 5.0], [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]]);
        let out = baseline(&s, 10.0).unwrap();
        assert_eq!(out.intensity().row(0).to_vec(), [0.0, 0.0, 1.0, 0.0, 4.0, 0.0]);
        assert_eq!(out.intensity().row(1).to_vec(), [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let z = spectrum(Array2::zeros((3, 3)));
        assert_eq!(baseline(&z, 25.0).unwrap(), z);
        assert!(baseline(&z, 60.0).is_err());
    }

    #[test]
    fn baseline_shift_invariant_and_zeroes_percentile() {
        let mut rng = crate::rng::rng_from(5, &[]);
        let m = Array2::from_shape_fn((6, 13), |_| rng.random::<f64>() * 10.0);
        for p in [0.0, 10.0, 33.0, 50.0] {
            let a = baseline(&spectrum(m.clone()), p).unwrap();
            let b = baseline(&spectrum(m.mapv(|v| v + 7.0)), p).unwrap();
            for (x, y) in a.intensity().iter().zip(b.intensity()) {
                assert!((x - y).abs() < 1e-9);
            }
            for row in a.intensity().rows() {
                assert!(nearest_rank_percentile(row.as_slice().unwrap(), p).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn normalize_modes() {
        let s = spectrum(array![[1.0, 1.0], [0.5, 1.5]]);
        let t = normalize(&s, NormalizeMode::Tic).unwrap();
        assert_eq!(t.intensity(), &array![[0.25, 0.25], [0.125, 0.375]]);
        let s = spectrum(array![[10.0, 50.0], [-1.0, 2.0]]);
        let m = normalize(&s, NormalizeMode::Max).unwrap();
        assert_eq!(m.intensity()[[0, 1]], 1.0);
        let z = spectrum(Array2::zeros((2, 2)));
        assert!(matches!(normalize(&z, NormalizeMode::Tic), Err(Error::DegenerateSpectrum(_))));
        assert!(matches!(normalize(&z, NormalizeMode::Max), Err(Error::DegenerateSpectrum(_))));
    }

    #[test]
    fn binning() {
        let s = spectrum(Array2::from_elem((4, 4), 2.0));
        let b = bin(&s, 2, 2).unwrap();
        assert_eq!(b.intensity(), &Array2::from_elem((2, 2), 2.0));
        assert_eq!(b.drift_axis().step, 0.04);
        assert_eq!(b.retention_axis().count, 2);
        assert_eq!(block_mean(&array![[1.0, 2.0], [3.0, 4.0]], 2, 2), array![[2.5]]);
        assert_eq!(bin(&s, 1, 1).unwrap(), s);
        // 2x2 would collapse to a single point per axis
        let tiny = spectrum(array![[1.0, 2.0], [3.0, 4.0]]);
        assert!(matches!(bin(&tiny, 2, 2), Err(Error::BinTooCoarse(_))));
    }

    #[test]
    fn binning_partial_blocks() {
        let m = Array2::from_shape_fn((5, 3), |(r, c)| (r * 3 + c) as f64);
        let b = block_mean(&m, 2, 2);
        assert_eq!(b.dim(), (3, 2));
        assert_eq!(b[[0, 0]], (0.0 + 1.0 + 3.0 + 4.0) / 4.0);
        assert_eq!(b[[0, 1]], (2.0 + 5.0) / 2.0);
        assert_eq!(b[[2, 1]], 14.0);
    }

    #[test]
    fn pipeline_composition() {
        let s = spectrum(Array2::from_elem((6, 6), 4.0));
        assert_eq!(run_pipeline(&s, &PreprocessConfig::default()).unwrap(), s);
        let mut m = Array2::from_elem((6, 6), 4.0);
        m[[2, 3]] = 400.0;
        let cfg = PreprocessConfig::new(vec![
            Step::Despike { window: 3 },
            Step::Baseline { percentile: 10.0 },
        ])
        .unwrap();
        let out = run_pipeline(&spectrum(m.clone()), &cfg).unwrap();
        assert!(out.intensity().iter().all(|&v| v == 0.0));
        let again = run_pipeline(&spectrum(m), &cfg).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn config_text_roundtrip() {
        let cfg = PreprocessConfig::standard();
        let text = cfg.to_string();
        assert_eq!(text.parse::<PreprocessConfig>().unwrap(), cfg);
        let parsed: PreprocessConfig = "# c\n\nsmooth = 2\nbin = 2x3\nnormalize = max\n".parse().unwrap();
        assert_eq!(
            parsed.steps,
            [
                Step::Smooth { sigma: 2.0 },
                Step::Bin { rows: 2, cols: 3 },
                Step::Normalize { mode: NormalizeMode::Max }
            ]
        );
        assert!("despike = 4".parse::<PreprocessConfig>().is_err());
        assert!("sharpen = 1".parse::<PreprocessConfig>().is_err());
        assert!("smooth 1".parse::<PreprocessConfig>().is_err());
    }

    #[test]
    fn steps_keep_shape_and_finiteness() {
        let mut rng = crate::rng::rng_from(9, &[]);
        let s = spectrum(Array2::from_shape_fn((12, 14), |_| rng.random::<f64>()));
        for step in [
            Step::Despike { window: 3 },
            Step::Smooth { sigma: 0.7 },
            Step::Baseline { percentile: 20.0 },
            Step::Normalize { mode: NormalizeMode::Tic },
        ] {
            let out = step.apply(&s).unwrap();
            assert_eq!(out.shape(), s.shape());
            assert!(out.intensity().iter().all(|v| v.is_finite()));
        }
    }
}
