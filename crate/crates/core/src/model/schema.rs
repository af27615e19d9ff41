use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{CLUSTER, DAY_OF_WEEK, DURATION, END, EVENT_TYPE, START, START_TIME_OF_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Temporal,
    Categorical,
    Numerical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Event,
    Sequence,
}

/// Shape of the stored value, which is what comparisons and summaries care
/// about. Derived temporal attributes such as `duration` carry numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Number,
    Category,
    Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub kind: AttributeKind,
    pub level: Level,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl AttributeDef {
    pub fn new(name: impl Into<String>, kind: AttributeKind, level: Level) -> Self {
        AttributeDef { name: name.into(), kind, level, unit: None }
    }

    pub fn value_type(&self) -> ValueType {
        match self.kind {
            AttributeKind::Numerical => ValueType::Number,
            AttributeKind::Categorical => ValueType::Category,
            AttributeKind::Temporal => ValueType::Timestamp,
        }
    }
}

/// Resolved attribute handle: either a stored column or one of the derived
/// names computed from the occurrence itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrRef {
    pub name: String,
    pub kind: AttributeKind,
    pub level: Level,
    pub value_type: ValueType,
    pub unit: Option<String>,
    pub derived: Option<Derived>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derived {
    Duration,
    StartTimeOfDay,
    DayOfWeek,
    Start,
    End,
    EventType,
    Cluster,
}

impl AttrRef {
    pub fn is_numeric(&self) -> bool {
        self.value_type == ValueType::Number
    }

    pub fn is_categorical(&self) -> bool {
        self.value_type == ValueType::Category
    }
}

fn derived(name: &str) -> Option<AttrRef> {
    use AttributeKind::*;
    let (d, kind, level, vt, unit) = match name {
        DURATION => (Derived::Duration, Temporal, Level::Event, ValueType::Number, Some("s")),
        START_TIME_OF_DAY => {
            (Derived::StartTimeOfDay, Temporal, Level::Event, ValueType::Number, Some("min"))
        }
        DAY_OF_WEEK => (Derived::DayOfWeek, Temporal, Level::Event, ValueType::Category, None),
        START => (Derived::Start, Temporal, Level::Event, ValueType::Timestamp, Some("s")),
        END => (Derived::End, Temporal, Level::Event, ValueType::Timestamp, Some("s")),
        EVENT_TYPE => (Derived::EventType, Categorical, Level::Event, ValueType::Category, None),
        CLUSTER => (Derived::Cluster, Categorical, Level::Sequence, ValueType::Category, None),
        _ => return None,
    };
    Some(AttrRef {
        name: name.to_string(),
        kind,
        level,
        value_type: vt,
        unit: unit.map(str::to_string),
        derived: Some(d),
    })
}

/// Names that user columns may not take.
pub const RESERVED: [&str; 7] = [DURATION, START_TIME_OF_DAY, DAY_OF_WEEK, START, END, EVENT_TYPE, CLUSTER];

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AttributeSchema {
    attributes: Vec<AttributeDef>,
}

impl AttributeSchema {
    /// Names must be unique across both levels and must not shadow a derived
    /// attribute.
    pub fn new(attributes: Vec<AttributeDef>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for a in &attributes {
            if a.name.is_empty() {
                return Err(Error::Schema("attribute with empty name".into()));
            }
            if RESERVED.iter().any(|r| r.eq_ignore_ascii_case(&a.name)) {
                return Err(Error::Schema(format!("`{}` is a reserved attribute name", a.name)));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Schema(format!("attribute `{}` declared twice", a.name)));
            }
        }
        Ok(AttributeSchema { attributes })
    }

    pub fn attributes(&self) -> &[AttributeDef] {
        &self.attributes
    }

    pub fn get(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn at_level(&self, level: Level) -> impl Iterator<Item = &AttributeDef> {
        self.attributes.iter().filter(move |a| a.level == level)
    }

    /// Stored or derived attribute by name.
    pub fn lookup(&self, name: &str) -> Result<AttrRef> {
        if let Some(d) = derived(name) {
            return Ok(d);
        }
        self.get(name)
            .map(|a| AttrRef {
                name: a.name.clone(),
                kind: a.kind,
                level: a.level,
                value_type: a.value_type(),
                unit: a.unit.clone(),
                derived: None,
            })
            .ok_or_else(|| Error::Name(name.to_string()))
    }

    /// All queryable attributes: stored ones followed by the derived event
    /// attributes (not `cluster`, which needs a clustering).
    pub fn all_names(&self) -> Vec<String> {
        self.attributes
            .iter()
            .map(|a| a.name.clone())
            .chain(RESERVED[..6].iter().map(|s| s.to_string()))
            .collect()
    }
}
