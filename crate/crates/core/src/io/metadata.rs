//! Comma-separated clinic metadata with the fixed header
//! `sample_id,age,sex,site,collected_on,label`.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectrum::{SampleLabel, SampleRecord};

pub const METADATA_HEADER: [&str; 6] = ["sample_id", "age", "sex", "site", "collected_on", "label"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetadataTable {
    pub rows: Vec<SampleRecord>,
}

pub fn read_metadata(path: impl AsRef<Path>) -> Result<MetadataTable> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::MissingMetadataFile(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_metadata(&text)
}

pub fn parse_metadata(text: &str) -> Result<MetadataTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = reader.headers().map_err(|e| csv_error(&e, 1))?.clone();
    if header.iter().ne(METADATA_HEADER.iter().copied()) {
        return Err(Error::MetadataParse {
            line: 1,
            message: format!(
                "header {:?} does not match {}",
                header.iter().collect::<Vec<_>>(),
                METADATA_HEADER.join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for result in reader.records() {
        let row = result.map_err(|e| csv_error(&e, 0))?;
        let line = row.position().map_or(0, |p| p.line());
        let err = |message: String| Error::MetadataParse { line, message };

        let sample_id = row[0].to_string();
        let age = row[1]
            .parse::<i64>()
            .map_err(|_| err(format!("age {:?} is not an integer", &row[1])))?;
        let label = match &row[5] {
            "" => None,
            s => Some(s.parse::<SampleLabel>().map_err(|e| err(e.to_string()))?),
        };
        if !seen.insert(sample_id.clone()) {
            return Err(err(format!("duplicate sample_id {sample_id:?}")));
        }
        rows.push(SampleRecord {
            sample_id,
            age,
            sex: row[2].to_string(),
            site: row[3].to_string(),
            collected_on: row[4].to_string(),
            label,
        });
    }
    Ok(MetadataTable { rows })
}

fn csv_error(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::MetadataParse {
        line,
        message: e.to_string(),
    }
}

pub fn write_metadata(path: impl AsRef<Path>, records: &[SampleRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = METADATA_HEADER.join(",");
    out.push('\n');
    for r in records {
        let label = r.label.map_or("", SampleLabel::as_str);
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.sample_id, r.age, r.sex, r.site, r.collected_on, label
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
