use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::schema::{AttrRef, AttributeSchema, Derived, Level, ValueType};
use super::time::{TimeZoneSpec, WEEKDAYS};
use super::value::AttributeValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccurrenceId(pub u64);

impl fmt::Display for OccurrenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SequenceId(pub String);

impl SequenceId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SequenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SequenceId {
    fn from(s: &str) -> Self {
        SequenceId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventOccurrence {
    pub id: OccurrenceId,
    pub sequence_id: SequenceId,
    pub event_type: String,
    pub start: i64,
    pub end: i64,
    #[serde(default)]
    pub attrs: BTreeMap<String, AttributeValue>,
}

impl EventOccurrence {
    pub fn duration(&self) -> i64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub id: SequenceId,
    pub events: Vec<EventOccurrence>,
    #[serde(default)]
    pub attrs: BTreeMap<String, AttributeValue>,
}

impl Sequence {
    pub fn signature(&self) -> Vec<&str> {
        self.events.iter().map(|e| e.event_type.as_str()).collect()
    }
}

/// One applied transformation, as written to the provenance log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub op: String,
    pub params: serde_json::Value,
    pub input_version: Option<u64>,
    pub output_version: u64,
}

/// Immutable collection of sequences under a schema. Transformations build
/// new datasets with a higher `version`.
#[derive(Debug, Clone, Serialize)]
pub struct Dataset {
    version: u64,
    schema: AttributeSchema,
    timezone: TimeZoneSpec,
    sequences: Vec<Sequence>,
    provenance: Vec<ProvenanceEntry>,
    #[serde(skip)]
    index: HashMap<OccurrenceId, (u32, u32)>,
    #[serde(skip)]
    seq_index: HashMap<SequenceId, u32>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.version == other.version
            && self.schema == other.schema
            && self.timezone == other.timezone
            && self.sequences == other.sequences
            && self.provenance == other.provenance
    }
}

fn value_matches(value: &AttributeValue, vt: ValueType) -> bool {
    matches!(
        (value, vt),
        (AttributeValue::Missing, _)
            | (AttributeValue::Number(_), ValueType::Number)
            | (AttributeValue::Category(_), ValueType::Category)
            | (AttributeValue::Timestamp(_), ValueType::Timestamp)
    )
}

impl Dataset {
    /// Validates every model invariant and builds the lookup indexes.
    pub fn new(
        version: u64,
        schema: AttributeSchema,
        timezone: TimeZoneSpec,
        sequences: Vec<Sequence>,
        provenance: Vec<ProvenanceEntry>,
    ) -> Result<Self> {
        let mut index = HashMap::new();
        let mut seq_index = HashMap::new();
        for (si, seq) in sequences.iter().enumerate() {
            if seq_index.insert(seq.id.clone(), si as u32).is_some() {
                return Err(Error::Schema(format!("sequence `{}` appears twice", seq.id)));
            }
            for (name, v) in &seq.attrs {
                let def = schema.get(name).filter(|d| d.level == Level::Sequence).ok_or_else(
                    || Error::Schema(format!("sequence attribute `{name}` not in schema")),
                )?;
                if !value_matches(v, def.value_type()) {
                    return Err(Error::Schema(format!("value of `{name}` does not match its kind")));
                }
            }
            let mut prev = i64::MIN;
            for (ei, ev) in seq.events.iter().enumerate() {
                if ev.sequence_id != seq.id {
                    return Err(Error::Schema(format!(
                        "occurrence {} claims sequence `{}` but lives in `{}`",
                        ev.id, ev.sequence_id, seq.id
                    )));
                }
                if ev.end < ev.start {
                    return Err(Error::Schema(format!("occurrence {} ends before it starts", ev.id)));
                }
                if ev.start < prev {
                    return Err(Error::Schema(format!("sequence `{}` is not sorted by start", seq.id)));
                }
                prev = ev.start;
                for (name, v) in &ev.attrs {
                    let def = schema.get(name).filter(|d| d.level == Level::Event).ok_or_else(
                        || Error::Schema(format!("event attribute `{name}` not in schema")),
                    )?;
                    if !value_matches(v, def.value_type()) {
                        return Err(Error::Schema(format!(
                            "value of `{name}` does not match its kind"
                        )));
                    }
                }
                if index.insert(ev.id, (si as u32, ei as u32)).is_some() {
                    return Err(Error::Schema(format!("occurrence id {} is not unique", ev.id)));
                }
            }
        }
        Ok(Dataset { version, schema, timezone, sequences, provenance, index, seq_index })
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.schema
    }

    pub fn timezone(&self) -> TimeZoneSpec {
        self.timezone
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn provenance(&self) -> &[ProvenanceEntry] {
        &self.provenance
    }

    pub fn n_events(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn sequence(&self, id: &SequenceId) -> Option<&Sequence> {
        self.seq_index.get(id).map(|&i| &self.sequences[i as usize])
    }

    pub fn sequence_position(&self, id: &SequenceId) -> Option<usize> {
        self.seq_index.get(id).map(|&i| i as usize)
    }

    pub fn occurrence(&self, id: OccurrenceId) -> Option<(&Sequence, &EventOccurrence)> {
        self.index.get(&id).map(|&(s, e)| {
            let seq = &self.sequences[s as usize];
            (seq, &seq.events[e as usize])
        })
    }

    pub fn occurrences(&self) -> impl Iterator<Item = (&Sequence, &EventOccurrence)> {
        self.sequences.iter().flat_map(|s| s.events.iter().map(move |e| (s, e)))
    }

    pub fn max_occurrence_id(&self) -> Option<OccurrenceId> {
        self.index.keys().max().copied()
    }

    /// Distinct event types in order of first appearance.
    pub fn event_types(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (_, e) in self.occurrences() {
            if seen.insert(e.event_type.as_str()) {
                out.push(e.event_type.clone());
            }
        }
        out
    }

    /// Value of `attr` for an occurrence. `cluster` resolves to missing here;
    /// callers with a clustering look it up themselves.
    pub fn value(&self, seq: &Sequence, ev: &EventOccurrence, attr: &AttrRef) -> AttributeValue {
        match attr.derived {
            Some(Derived::Duration) => AttributeValue::Number(ev.duration() as f64),
            Some(Derived::StartTimeOfDay) => {
                AttributeValue::Number(self.timezone.minutes_of_day(ev.start))
            }
            Some(Derived::DayOfWeek) => {
                AttributeValue::Category(WEEKDAYS[self.timezone.weekday(ev.start)].to_string())
            }
            Some(Derived::Start) => AttributeValue::Timestamp(ev.start),
            Some(Derived::End) => AttributeValue::Timestamp(ev.end),
            Some(Derived::EventType) => AttributeValue::Category(ev.event_type.clone()),
            Some(Derived::Cluster) => AttributeValue::Missing,
            None => {
                let map = match attr.level {
                    Level::Event => &ev.attrs,
                    Level::Sequence => &seq.attrs,
                };
                map.get(&attr.name).cloned().unwrap_or_default()
            }
        }
    }

    /// Builds a successor dataset carrying a new provenance entry.
    pub(crate) fn derive(
        &self,
        sequences: Vec<Sequence>,
        op: &str,
        params: serde_json::Value,
    ) -> Result<Dataset> {
        let mut provenance = self.provenance.clone();
        provenance.push(ProvenanceEntry {
            op: op.to_string(),
            params,
            input_version: Some(self.version),
            output_version: self.version + 1,
        });
        Dataset::new(self.version + 1, self.schema.clone(), self.timezone, sequences, provenance)
    }
}

/// Attribute value of one occurrence, falling back to its sequence for
/// sequence-level attributes.
pub fn resolve_attribute(
    dataset: &Dataset,
    occurrence_id: OccurrenceId,
    name: &str,
) -> Result<AttributeValue> {
    let attr = dataset.schema().lookup(name)?;
    let (seq, ev) = dataset
        .occurrence(occurrence_id)
        .ok_or_else(|| Error::NotFound(format!("occurrence {occurrence_id}")))?;
    Ok(dataset.value(seq, ev, &attr))
}
