//! Delimited-file ingestion, schema inference, data-quality reporting and the
//! synthetic clinic-visit generator.

mod config;
mod export;
mod infer;
mod load;
mod synthetic;
mod timestamp;

pub use config::{ColumnMapping, EndColumn, IngestConfig, DEFAULT_TIMESTAMP_FORMAT};
pub use export::{export_events_csv, export_sequence_attrs_csv};
pub use infer::{infer_schema, read_raw, RawTable};
pub use load::{load_dataset, QualityReport, RejectReason};
pub use synthetic::{generate_synthetic, PlantedEffect, SyntheticConfig};
pub use timestamp::{format_timestamp, parse_timestamp};

/// Cell contents treated as missing.
pub const MISSING_TOKENS: [&str; 5] = ["", "NA", "N/A", "null", "NULL"];

pub(crate) fn is_missing_token(s: &str) -> bool {
    MISSING_TOKENS.contains(&s.trim())
}
