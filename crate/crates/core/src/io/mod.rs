//! Spectrum container, clinic metadata table and quality checks.

mod imsx;
mod load;
mod metadata;
mod validate;

pub use imsx::{decode_imsx, encode_imsx, read_imsx, write_imsx, IMSX_MAGIC, IMSX_VERSION};
pub use load::{inspect_dataset, load_dataset, write_dataset, Inspection, METADATA_FILE_NAME};
pub use metadata::{parse_metadata, read_metadata, write_metadata, MetadataTable, METADATA_HEADER};
pub use validate::{
    validate_measurement, validate_record, Check, ValidationReport, NEGATIVE_FRACTION_LIMIT,
};
