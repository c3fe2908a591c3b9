use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::imsx::{read_imsx, write_imsx};
use super::metadata::{read_metadata, write_metadata};
use super::validate::{validate_measurement, validate_record, ValidationReport};
use crate::error::{Error, Result};
use crate::spectrum::{Dataset, ImsSpectrum, SampleRecord};

pub const METADATA_FILE_NAME: &str = "metadata.csv";

/// Outcome of checking a spectra directory against a metadata table.
#[derive(Debug)]
pub struct Inspection {
    /// One report per metadata row (in table order), then one per orphan or
    /// unreadable spectrum file.
    pub reports: Vec<ValidationReport>,
    pub admitted_records: Vec<SampleRecord>,
    pub admitted_spectra: BTreeMap<String, ImsSpectrum>,
}

fn imsx_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "imsx") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Validates every record and spectrum. A sample is admitted only when its
/// record checks, its measurement checks and the cross checks all pass.
pub fn inspect_dataset(spectra_dir: impl AsRef<Path>, metadata_path: impl AsRef<Path>) -> Result<Inspection> {
    let table = read_metadata(metadata_path)?;
    let files = imsx_files(spectra_dir.as_ref())?;
    let parsed: Vec<(PathBuf, Result<ImsSpectrum>)> = files
        .into_par_iter()
        .map(|p| {
            let s = read_imsx(&p);
            (p, s)
        })
        .collect();

    let mut extra_reports = Vec::new();
    let mut spectra: BTreeMap<String, ImsSpectrum> = BTreeMap::new();
    for (path, result) in parsed {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match result {
            Ok(s) => {
                if spectra.contains_key(s.sample_id()) {
                    let mut r = ValidationReport::new(s.sample_id());
                    r.push(
                        "unique_spectrum",
                        false,
                        format!("{} repeats an earlier sample_id", path.display()),
                    );
                    extra_reports.push(r);
                } else {
                    spectra.insert(s.sample_id().to_string(), s);
                }
            }
            Err(e) => {
                let mut r = ValidationReport::new(stem);
                r.push("imsx_readable", false, format!("{}: {e}", path.display()));
                extra_reports.push(r);
            }
        }
    }

    let mut reports = Vec::with_capacity(table.rows.len());
    let mut admitted_records = Vec::new();
    let mut admitted_spectra = BTreeMap::new();
    let mut reference: Option<ImsSpectrum> = None;
    for record in &table.rows {
        let mut report = validate_record(record);
        match spectra.remove(&record.sample_id) {
            Some(spectrum) => {
                report.push("spectrum_present", true, "");
                report.merge(validate_measurement(&spectrum));
                if let Some(reference) = &reference {
                    report.push(
                        "axes_consistent",
                        spectrum.same_axes(reference),
                        format!("axes compared against {}", reference.sample_id()),
                    );
                }
                if report.passed() {
                    if reference.is_none() {
                        reference = Some(spectrum.clone());
                    }
                    admitted_records.push(record.clone());
                    admitted_spectra.insert(record.sample_id.clone(), spectrum);
                }
            }
            None => report.push("spectrum_present", false, "no .imsx file carries this sample_id"),
        }
        reports.push(report);
    }
    for (id, _) in spectra {
        let mut r = ValidationReport::new(id);
        r.push("record_present", false, "spectrum has no metadata row");
        extra_reports.push(r);
    }
    reports.extend(extra_reports);

    Ok(Inspection {
        reports,
        admitted_records,
        admitted_spectra,
    })
}

/// Loads only the samples whose clinic record and measurement both validate.
pub fn load_dataset(
    spectra_dir: impl AsRef<Path>,
    metadata_path: impl AsRef<Path>,
) -> Result<(Dataset, Vec<ValidationReport>)> {
    let inspection = inspect_dataset(spectra_dir, metadata_path)?;
    if inspection.admitted_records.is_empty() {
        return Err(Error::NoValidSamples);
    }
    let dataset = Dataset::new(inspection.admitted_records, inspection.admitted_spectra)?;
    Ok((dataset, inspection.reports))
}

/// Writes `<sample_id>.imsx` for every sample plus `metadata.csv`.
pub fn write_dataset(dir: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    dataset
        .records()
        .par_iter()
        .try_for_each(|r| -> Result<()> {
            let spectrum = &dataset.spectra()[&r.sample_id];
            write_imsx(spectrum, dir.join(format!("{}.imsx", r.sample_id)))?;
            Ok(())
        })?;
    write_metadata(dir.join(METADATA_FILE_NAME), dataset.records())
}
