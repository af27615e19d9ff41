use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AttributeKind, AttributeSchema, AttributeValue, Dataset, EventOccurrence, Level, OccurrenceId,
    ProvenanceEntry, Sequence, SequenceId, TimeZoneSpec,
};

use super::config::{EndColumn, IngestConfig};
use super::infer::{infer_schema, read_raw, RawTable};
use super::is_missing_token;
use super::timestamp::parse_timestamp;

const MAX_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Duplicate,
    InvalidTimestamp,
    NegativeDuration,
    MissingRequired,
    MalformedRow,
}

/// Data-quality summary of one load. Row indices are zero-based data rows
/// (the header is not counted).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QualityReport {
    pub rows_read: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub rejections: BTreeMap<RejectReason, usize>,
    pub duplicate_rows: usize,
    /// Rows equal on the mapped columns but differing elsewhere; kept.
    pub near_duplicate_rows: usize,
    pub invalid_timestamps: usize,
    pub negative_durations: usize,
    pub missing_cells: BTreeMap<String, usize>,
    /// Cells that did not parse as their column's kind; stored as missing.
    pub invalid_cells: BTreeMap<String, usize>,
    pub sequence_attr_rows_read: usize,
    pub orphan_sequence_attributes: usize,
    pub duplicate_sequence_attribute_rows: usize,
    pub samples: BTreeMap<String, Vec<usize>>,
}

impl QualityReport {
    fn sample(&mut self, issue: &str, row: usize) {
        let v = self.samples.entry(issue.to_string()).or_default();
        if v.len() < MAX_SAMPLES {
            v.push(row);
        }
    }

    fn reject(&mut self, reason: RejectReason, row: usize) {
        self.rejected += 1;
        *self.rejections.entry(reason).or_default() += 1;
        match reason {
            RejectReason::Duplicate => self.duplicate_rows += 1,
            RejectReason::InvalidTimestamp => self.invalid_timestamps += 1,
            RejectReason::NegativeDuration => self.negative_durations += 1,
            _ => {}
        }
        let key = serde_json::to_value(reason).ok().and_then(|v| v.as_str().map(String::from));
        self.sample(key.as_deref().unwrap_or("rejected"), row);
    }
}

fn parse_cell(
    raw: &str,
    kind: AttributeKind,
    config: &IngestConfig,
    tz: TimeZoneSpec,
) -> Option<AttributeValue> {
    let t = raw.trim();
    match kind {
        AttributeKind::Numerical => {
            t.parse::<f64>().ok().filter(|x| x.is_finite()).map(AttributeValue::Number)
        }
        AttributeKind::Temporal => {
            parse_timestamp(t, &config.timestamp_format, tz).map(AttributeValue::Timestamp)
        }
        AttributeKind::Categorical => Some(AttributeValue::Category(t.to_string())),
    }
}

struct Pending {
    start: i64,
    end: i64,
    event_type: String,
    attrs: BTreeMap<String, AttributeValue>,
}

/// Loads events (and optional sequence attributes) into a dataset.
///
/// Bad rows are rejected with a reason and counted; the load only fails
/// when a mapped column is absent or no row survives.
pub fn load_dataset(config: &IngestConfig) -> Result<(Dataset, QualityReport)> {
    let delim = config.delimiter_byte()?;
    let events = read_raw(&config.events_path, delim)?;
    let seq_table = match &config.sequence_attrs_path {
        Some(p) => Some(read_raw(p, delim)?),
        None => None,
    };
    let schema = infer_schema(&events, seq_table.as_ref(), config)?;
    load_tables(config, schema, &events, seq_table.as_ref())
}

pub(crate) fn load_tables(
    config: &IngestConfig,
    schema: AttributeSchema,
    events: &RawTable,
    seq_table: Option<&RawTable>,
) -> Result<(Dataset, QualityReport)> {
    let tz = config.timezone;
    let cols = &config.columns;
    let col = |t: &RawTable, name: &str| {
        t.column(name).ok_or_else(|| Error::Schema(format!("mapped column `{name}` absent")))
    };
    let i_seq = col(events, &cols.sequence_id)?;
    let i_type = col(events, &cols.event_type)?;
    let i_start = col(events, &cols.start)?;
    let end_col = cols.end_column()?;
    let i_end = match &end_col {
        EndColumn::End(c) | EndColumn::Duration(c) => col(events, c)?,
    };
    let mapped = [i_seq, i_type, i_start, i_end];
    let attr_cols: Vec<(usize, String, AttributeKind)> = events
        .headers
        .iter()
        .enumerate()
        .filter(|(i, _)| !mapped.contains(i))
        .filter_map(|(i, h)| schema.get(h).map(|d| (i, h.clone(), d.kind)))
        .collect();

    let mut q = QualityReport { rows_read: events.rows.len(), ..Default::default() };
    let mut seen_rows: HashSet<&[String]> = HashSet::new();
    let mut seen_keys: HashSet<[&str; 4]> = HashSet::new();
    let mut order: Vec<SequenceId> = Vec::new();
    let mut groups: HashMap<SequenceId, Vec<Pending>> = HashMap::new();

    for (r, row) in events.rows.iter().enumerate() {
        if row.len() != events.headers.len() {
            q.reject(RejectReason::MalformedRow, r);
            continue;
        }
        if !seen_rows.insert(row.as_slice()) {
            q.reject(RejectReason::Duplicate, r);
            continue;
        }
        let sid = row[i_seq].trim();
        let ety = row[i_type].trim();
        if is_missing_token(sid) || is_missing_token(ety) {
            q.reject(RejectReason::MissingRequired, r);
            continue;
        }
        let Some(start) = parse_timestamp(&row[i_start], &config.timestamp_format, tz) else {
            q.reject(RejectReason::InvalidTimestamp, r);
            continue;
        };
        let end = match &end_col {
            EndColumn::End(_) => parse_timestamp(&row[i_end], &config.timestamp_format, tz),
            EndColumn::Duration(_) => row[i_end]
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|d| d.is_finite())
                .map(|d| start + d.round() as i64),
        };
        let Some(end) = end else {
            q.reject(RejectReason::InvalidTimestamp, r);
            continue;
        };
        if end < start {
            q.reject(RejectReason::NegativeDuration, r);
            continue;
        }
        if !seen_keys.insert([sid, ety, row[i_start].as_str(), row[i_end].as_str()]) {
            q.near_duplicate_rows += 1;
            q.sample("near_duplicate", r);
        }
        let mut attrs = BTreeMap::new();
        for (i, name, kind) in &attr_cols {
            let raw = &row[*i];
            let value = if is_missing_token(raw) {
                *q.missing_cells.entry(name.clone()).or_default() += 1;
                AttributeValue::Missing
            } else if let Some(v) = parse_cell(raw, *kind, config, tz) {
                v
            } else {
                *q.invalid_cells.entry(name.clone()).or_default() += 1;
                q.sample("invalid_cell", r);
                AttributeValue::Missing
            };
            attrs.insert(name.clone(), value);
        }
        let sid = SequenceId(sid.to_string());
        let group = groups.entry(sid.clone()).or_insert_with(|| {
            order.push(sid);
            Vec::new()
        });
        group.push(Pending { start, end, event_type: ety.to_string(), attrs });
        q.accepted += 1;
    }

    if q.accepted == 0 {
        return Err(Error::EmptyDataset(format!(
            "all {} rows of {} were rejected",
            q.rows_read,
            config.events_path.display()
        )));
    }

    let mut seq_attrs: HashMap<SequenceId, BTreeMap<String, AttributeValue>> = HashMap::new();
    if let Some(t) = seq_table {
        q.sequence_attr_rows_read = t.rows.len();
        let i_id = col(t, &cols.sequence_id)?;
        let seq_cols: Vec<(usize, String, AttributeKind)> = t
            .headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != i_id)
            .filter_map(|(i, h)| {
                schema.get(h).filter(|d| d.level == Level::Sequence).map(|d| (i, h.clone(), d.kind))
            })
            .collect();
        for (r, row) in t.rows.iter().enumerate() {
            if row.len() != t.headers.len() {
                q.sample("malformed_sequence_attribute_row", r);
                continue;
            }
            let sid = SequenceId(row[i_id].trim().to_string());
            if !groups.contains_key(&sid) {
                q.orphan_sequence_attributes += 1;
                q.sample("orphan_sequence_attribute", r);
                continue;
            }
            if seq_attrs.contains_key(&sid) {
                q.duplicate_sequence_attribute_rows += 1;
                q.sample("duplicate_sequence_attribute", r);
                continue;
            }
            let mut attrs = BTreeMap::new();
            for (i, name, kind) in &seq_cols {
                let raw = &row[*i];
                let value = if is_missing_token(raw) {
                    *q.missing_cells.entry(name.clone()).or_default() += 1;
                    AttributeValue::Missing
                } else if let Some(v) = parse_cell(raw, *kind, config, tz) {
                    v
                } else {
                    *q.invalid_cells.entry(name.clone()).or_default() += 1;
                    AttributeValue::Missing
                };
                attrs.insert(name.clone(), value);
            }
            seq_attrs.insert(sid, attrs);
        }
    }

    // Occurrence ids follow the final (grouped, start-sorted) order so that
    // exporting and reloading reproduces them.
    let seq_names: Vec<String> = schema.at_level(Level::Sequence).map(|d| d.name.clone()).collect();
    let mut next = 0u64;
    let mut sequences = Vec::with_capacity(order.len());
    for sid in order {
        let mut pending = groups.remove(&sid).unwrap_or_default();
        pending.sort_by_key(|p| p.start);
        let events = pending
            .into_iter()
            .map(|p| {
                let id = OccurrenceId(next);
                next += 1;
                EventOccurrence {
                    id,
                    sequence_id: sid.clone(),
                    event_type: p.event_type,
                    start: p.start,
                    end: p.end,
                    attrs: p.attrs,
                }
            })
            .collect();
        let attrs = seq_attrs.remove(&sid).unwrap_or_else(|| {
            seq_names.iter().map(|n| (n.clone(), AttributeValue::Missing)).collect()
        });
        sequences.push(Sequence { id: sid, events, attrs });
    }

    let provenance = vec![ProvenanceEntry {
        op: "load".into(),
        params: serde_json::to_value(config)?,
        input_version: None,
        output_version: 0,
    }];
    let dataset = Dataset::new(0, schema, tz, sequences, provenance)?;
    debug_assert_eq!(q.rows_read, q.accepted + q.rejected);
    Ok((dataset, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    const H: &str = "sequence_id,event_type,start,end,doctor\n";

    #[test]
    fn duplicate_collapsed() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!(
            "{H}s1,a,2024-01-01 09:00:00,2024-01-01 09:30:00,D1\n\
             s1,a,2024-01-01 09:00:00,2024-01-01 09:30:00,D1\n\
             s1,b,2024-01-01 09:30:00,2024-01-01 09:40:00,D2\n"
        );
        let (d, q) = load_dataset(&IngestConfig::new(write(&dir, "e.csv", &body))).unwrap();
        assert_eq!(d.n_events(), 2);
        assert_eq!(q.duplicate_rows, 1);
        assert_eq!(q.rows_read, q.accepted + q.rejected);
    }

    #[test]
    fn negative_duration_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!(
            "{H}s1,a,2024-01-01 09:00:00,2024-01-01 08:30:00,D1\n\
             s1,b,2024-01-01 09:30:00,2024-01-01 09:40:00,D2\n\
             s2,b,nonsense,2024-01-01 09:40:00,D2\n"
        );
        let (d, q) = load_dataset(&IngestConfig::new(write(&dir, "e.csv", &body))).unwrap();
        assert_eq!(q.negative_durations, 1);
        assert_eq!(q.invalid_timestamps, 1);
        assert_eq!(q.rejections[&RejectReason::NegativeDuration], 1);
        assert_eq!(d.n_events(), 1);
        assert_eq!(q.samples["negative_duration"], vec![0]);
    }

    #[test]
    fn grouping_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!(
            "{H}s1,b,2024-01-01 10:00:00,2024-01-01 10:10:00,\n\
             s2,a,2024-01-01 09:00:00,2024-01-01 09:10:00,D1\n\
             s1,a,2024-01-01 09:00:00,2024-01-01 09:10:00,D1\n"
        );
        let (d, q) = load_dataset(&IngestConfig::new(write(&dir, "e.csv", &body))).unwrap();
        let lens: Vec<_> = d.sequences().iter().map(|s| s.events.len()).collect();
        assert_eq!(lens, [2, 1]);
        assert_eq!(d.sequences()[0].signature(), ["a", "b"]);
        assert_eq!(q.missing_cells["doctor"], 1);
        assert!(d.sequences()[0].events[1].attrs["doctor"].is_missing());
    }

    #[test]
    fn duration_column_and_sequence_attrs() {
        let dir = tempfile::tempdir().unwrap();
        let ev = write(
            &dir,
            "e.csv",
            "pid;kind;at;secs\np1;scan;2024-01-01 09:00:00;600\np2;scan;2024-01-01 09:00:00;60\n",
        );
        let sa = write(&dir, "s.csv", "pid;age\np1;54\np9;30\np1;55\n");
        let mut cfg = IngestConfig::new(ev);
        cfg.delimiter = ';';
        cfg.sequence_attrs_path = Some(sa);
        cfg.columns.sequence_id = "pid".into();
        cfg.columns.event_type = "kind".into();
        cfg.columns.start = "at".into();
        cfg.columns.duration = Some("secs".into());
        let (d, q) = load_dataset(&cfg).unwrap();
        assert_eq!(d.sequences()[0].events[0].duration(), 600);
        assert_eq!(d.sequences()[0].attrs["age"], AttributeValue::Number(54.0));
        assert!(d.sequences()[1].attrs["age"].is_missing());
        assert_eq!(q.orphan_sequence_attributes, 1);
        assert_eq!(q.duplicate_sequence_attribute_rows, 1);
    }

    #[test]
    fn all_rejected_is_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("{H}s1,a,bad,bad,D1\n");
        let err = load_dataset(&IngestConfig::new(write(&dir, "e.csv", &body))).unwrap_err();
        assert_eq!(err.code(), "EmptyDatasetError");
    }

    #[test]
    fn both_end_and_duration_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = IngestConfig::new(write(&dir, "e.csv", H));
        cfg.columns.end = Some("end".into());
        cfg.columns.duration = Some("d".into());
        assert!(matches!(load_dataset(&cfg), Err(Error::Config(_))));
    }
}
