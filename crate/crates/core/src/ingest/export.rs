use std::io::Write;

use crate::error::Result;
use crate::model::{AttributeValue, Dataset, Level};

use super::timestamp::format_timestamp;

fn cell(v: Option<&AttributeValue>, format: &str, dataset: &Dataset) -> String {
    match v {
        Some(AttributeValue::Number(x)) => x.to_string(),
        Some(AttributeValue::Category(s)) => s.clone(),
        Some(AttributeValue::Timestamp(t)) => format_timestamp(*t, format, dataset.timezone()),
        Some(AttributeValue::Missing) | None => String::new(),
    }
}

/// Writes accepted events in the canonical column layout
/// `sequence_id,event_type,start,end,<event attributes>`.
pub fn export_events_csv<W: Write>(dataset: &Dataset, format: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<&str> =
        dataset.schema().at_level(Level::Event).map(|d| d.name.as_str()).collect();
    let mut header = vec!["sequence_id", "event_type", "start", "end"];
    header.extend(&names);
    w.write_record(&header)?;
    let tz = dataset.timezone();
    for (seq, ev) in dataset.occurrences() {
        let mut rec = vec![
            seq.id.0.clone(),
            ev.event_type.clone(),
            format_timestamp(ev.start, format, tz),
            format_timestamp(ev.end, format, tz),
        ];
        rec.extend(names.iter().map(|n| cell(ev.attrs.get(*n), format, dataset)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_sequence_attrs_csv<W: Write>(dataset: &Dataset, format: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<&str> =
        dataset.schema().at_level(Level::Sequence).map(|d| d.name.as_str()).collect();
    let mut header = vec!["sequence_id"];
    header.extend(&names);
    w.write_record(&header)?;
    for seq in dataset.sequences() {
        let mut rec = vec![seq.id.0.clone()];
        rec.extend(names.iter().map(|n| cell(seq.attrs.get(*n), format, dataset)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
