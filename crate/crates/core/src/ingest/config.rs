use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AttributeKind, TimeZoneSpec};

pub const DEFAULT_TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub sequence_id: String,
    pub event_type: String,
    pub start: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<String>,
    /// Duration in seconds, used instead of `end`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            sequence_id: "sequence_id".into(),
            event_type: "event_type".into(),
            start: "start".into(),
            end: None,
            duration: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EndColumn {
    End(String),
    Duration(String),
}

impl ColumnMapping {
    /// `end` when neither column is named explicitly.
    pub fn end_column(&self) -> Result<EndColumn> {
        match (&self.end, &self.duration) {
            (Some(_), Some(_)) => {
                Err(Error::Config("map either an end column or a duration column, not both".into()))
            }
            (Some(e), None) => Ok(EndColumn::End(e.clone())),
            (None, Some(d)) => Ok(EndColumn::Duration(d.clone())),
            (None, None) => Ok(EndColumn::End("end".into())),
        }
    }

    pub fn mapped(&self) -> Result<Vec<String>> {
        let last = match self.end_column()? {
            EndColumn::End(c) | EndColumn::Duration(c) => c,
        };
        Ok(vec![self.sequence_id.clone(), self.event_type.clone(), self.start.clone(), last])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub events_path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence_attrs_path: Option<PathBuf>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default)]
    pub columns: ColumnMapping,
    #[serde(default = "default_format")]
    pub timestamp_format: String,
    #[serde(default)]
    pub timezone: TimeZoneSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub kind_overrides: BTreeMap<String, AttributeKind>,
}

fn default_delimiter() -> char {
    ','
}

fn default_format() -> String {
    DEFAULT_TIMESTAMP_FORMAT.into()
}

impl IngestConfig {
    pub fn new(events_path: impl Into<PathBuf>) -> Self {
        IngestConfig {
            events_path: events_path.into(),
            sequence_attrs_path: None,
            delimiter: default_delimiter(),
            columns: ColumnMapping::default(),
            timestamp_format: default_format(),
            timezone: TimeZoneSpec::UTC,
            kind_overrides: BTreeMap::new(),
        }
    }

    pub(crate) fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter)
            .map_err(|_| Error::Config(format!("delimiter {:?} is not a single byte", self.delimiter)))
    }
}
