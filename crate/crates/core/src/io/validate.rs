use chrono::NaiveDate;
use serde::Serialize;

use crate::spectrum::{ImsSpectrum, SampleRecord};

/// Largest tolerated share of negative cells; baseline-corrected data may dip
/// slightly below zero.
pub const NEGATIVE_FRACTION_LIMIT: f64 = 0.01;

pub const SEX_CATEGORIES: [&str; 2] = ["male", "female"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub sample_id: String,
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl ValidationReport {
    pub fn new(sample_id: impl Into<String>) -> Self {
        ValidationReport {
            sample_id: sample_id.into(),
            checks: Vec::new(),
            overall: true,
        }
    }

    pub fn push(&mut self, name: &str, passed: bool, message: impl Into<String>) {
        self.overall &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            message: message.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        for c in other.checks {
            self.push(&c.name, c.passed, c.message);
        }
    }

    pub fn passed(&self) -> bool {
        self.overall
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn validate_measurement(spectrum: &ImsSpectrum) -> ValidationReport {
    let mut report = ValidationReport::new(spectrum.sample_id());
    let data = spectrum.intensity();
    let cells = data.len();

    let non_finite = data.iter().filter(|v| !v.is_finite()).count();
    report.push(
        "finite_values",
        non_finite == 0,
        format!("{non_finite} non-finite of {cells} cells"),
    );

    let d = spectrum.drift_axis();
    let r = spectrum.retention_axis();
    let monotonic = d.step > 0.0 && r.step > 0.0 && d.is_monotonic() && r.is_monotonic();
    report.push(
        "axes_monotonic",
        monotonic,
        format!("drift step {}, retention step {}", d.step, r.step),
    );

    let dims = data.dim() == (r.count, d.count);
    report.push(
        "dims_match_header",
        dims,
        format!(
            "matrix {:?}, header {}x{}",
            data.dim(),
            r.count,
            d.count
        ),
    );

    let negative = data.iter().filter(|&&v| v < 0.0).count();
    let fraction = negative as f64 / cells.max(1) as f64;
    report.push(
        "nonnegative_fraction",
        fraction <= NEGATIVE_FRACTION_LIMIT,
        format!("negative fraction {fraction:.6} (limit {NEGATIVE_FRACTION_LIMIT})"),
    );
    report
}

pub fn validate_record(record: &SampleRecord) -> ValidationReport {
    let mut report = ValidationReport::new(&record.sample_id);
    report.push(
        "age_range",
        (0..100).contains(&record.age),
        format!("age {} (valid 0..=99)", record.age),
    );
    let sex = record.sex.trim().to_ascii_lowercase();
    report.push(
        "sex_category",
        SEX_CATEGORIES.contains(&sex.as_str()),
        format!("sex {:?}", record.sex),
    );
    report.push(
        "id_nonempty",
        !record.sample_id.trim().is_empty(),
        "sample_id",
    );
    let date = NaiveDate::parse_from_str(record.collected_on.trim(), "%Y-%m-%d");
    report.push(
        "date_parseable",
        date.is_ok(),
        format!("collected_on {:?}", record.collected_on),
    );
    report
}
