use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{AttributeDef, AttributeKind, AttributeSchema, Level};

use super::config::IngestConfig;
use super::timestamp::parse_timestamp;
use super::is_missing_token;

/// Header plus raw string cells of a delimited file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Reads a delimited file with a header row. Ragged rows are kept as-is so
/// the loader can reject and report them.
pub fn read_raw(path: &Path, delimiter: u8) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .has_headers(true)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers.iter().all(String::is_empty) {
        return Err(Error::Schema(format!("{} has no header row", path.display())));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok(RawTable { headers, rows })
}

fn infer_kind(values: impl Iterator<Item = impl AsRef<str>>, config: &IngestConfig) -> AttributeKind {
    let mut any = false;
    let mut numeric = true;
    let mut temporal = true;
    for v in values {
        let v = v.as_ref();
        if is_missing_token(v) {
            continue;
        }
        any = true;
        if numeric && !v.trim().parse::<f64>().is_ok_and(f64::is_finite) {
            numeric = false;
        }
        if temporal && parse_timestamp(v, &config.timestamp_format, config.timezone).is_none() {
            temporal = false;
        }
        if !numeric && !temporal {
            break;
        }
    }
    match (any, numeric, temporal) {
        (true, true, _) => AttributeKind::Numerical,
        (true, false, true) => AttributeKind::Temporal,
        _ => AttributeKind::Categorical,
    }
}

fn check_headers(table: &RawTable, what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for h in &table.headers {
        if !seen.insert(h.as_str()) {
            return Err(Error::Schema(format!("{what} has duplicate column `{h}`")));
        }
    }
    Ok(())
}

/// Unmapped columns become attributes: numerical if every non-missing sample
/// parses as a number, temporal if every one parses with the timestamp
/// pattern, categorical otherwise. Overrides win.
pub fn infer_schema(
    events: &RawTable,
    sequence_attrs: Option<&RawTable>,
    config: &IngestConfig,
) -> Result<AttributeSchema> {
    check_headers(events, "events file")?;
    let mapped = config.columns.mapped()?;
    for m in &mapped {
        if events.column(m).is_none() {
            return Err(Error::Schema(format!("mapped column `{m}` absent from events file")));
        }
    }
    let mut defs = Vec::new();
    let mut add = |table: &RawTable, skip: &[String], level: Level| {
        for (i, h) in table.headers.iter().enumerate() {
            if skip.contains(h) {
                continue;
            }
            let kind = config.kind_overrides.get(h).copied().unwrap_or_else(|| {
                infer_kind(table.rows.iter().filter_map(|r| r.get(i)), config)
            });
            defs.push(AttributeDef::new(h.clone(), kind, level));
        }
    };
    add(events, &mapped, Level::Event);
    if let Some(seq) = sequence_attrs {
        check_headers(seq, "sequence attributes file")?;
        let id = &config.columns.sequence_id;
        if seq.column(id).is_none() {
            return Err(Error::Schema(format!(
                "mapped column `{id}` absent from sequence attributes file"
            )));
        }
        add(seq, std::slice::from_ref(id), Level::Sequence);
    }
    for name in config.kind_overrides.keys() {
        if !defs.iter().any(|d| &d.name == name) {
            return Err(Error::Config(format!("kind override for unknown column `{name}`")));
        }
    }
    AttributeSchema::new(defs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(headers: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        }
    }

    fn events(extra: &str, vals: [&str; 3]) -> RawTable {
        let h = ["sequence_id", "event_type", "start", "end", extra];
        let t = "2024-01-01 09:00:00";
        table(&h, &[&["s", "a", t, t, vals[0]], &["s", "a", t, t, vals[1]], &["s", "a", t, t, vals[2]]])
    }

    fn kind_of(schema: &AttributeSchema, name: &str) -> AttributeKind {
        schema.get(name).unwrap().kind
    }

    #[test]
    fn numerical_and_categorical() {
        let cfg = IngestConfig::new("x.csv");
        let s = infer_schema(&events("n", ["12", "7", "30"]), None, &cfg).unwrap();
        assert_eq!(kind_of(&s, "n"), AttributeKind::Numerical);
        let s = infer_schema(&events("c", ["Red", "Amber", "GreenT"]), None, &cfg).unwrap();
        assert_eq!(kind_of(&s, "c"), AttributeKind::Categorical);
        let s = infer_schema(&events("t", ["2024-02-01 10:00:00", "", "2024-02-02 10:00:00"]), None, &cfg)
            .unwrap();
        assert_eq!(kind_of(&s, "t"), AttributeKind::Temporal);
        assert_eq!(s.attributes().len(), 1);
    }

    #[test]
    fn override_wins() {
        let mut cfg = IngestConfig::new("x.csv");
        cfg.kind_overrides.insert("age".into(), AttributeKind::Categorical);
        let s = infer_schema(&events("age", ["40", "54", "61"]), None, &cfg).unwrap();
        assert_eq!(kind_of(&s, "age"), AttributeKind::Categorical);
    }

    #[test]
    fn levels_and_missing_mapping() {
        let cfg = IngestConfig::new("x.csv");
        let seq = table(&["sequence_id", "age"], &[&["s", "54"]]);
        let s = infer_schema(&events("doctor", ["a", "b", "c"]), Some(&seq), &cfg).unwrap();
        assert_eq!(s.get("age").unwrap().level, Level::Sequence);
        assert_eq!(s.get("doctor").unwrap().level, Level::Event);

        let bad = table(&["sequence_id", "event_type", "start"], &[]);
        assert!(matches!(infer_schema(&bad, None, &cfg), Err(Error::Schema(_))));
    }
}
