use std::fmt;

use serde::{Deserialize, Serialize};

/// A single attribute cell. `Missing` is its own state and never equals a
/// zero or an empty category.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeValue {
    Number(f64),
    Category(String),
    /// Seconds since the Unix epoch, UTC.
    Timestamp(i64),
    #[default]
    Missing,
}

impl AttributeValue {
    pub fn is_missing(&self) -> bool {
        matches!(self, AttributeValue::Missing)
    }

    /// Numeric view: numbers as-is, timestamps as epoch seconds.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttributeValue::Number(x) => Some(*x),
            AttributeValue::Timestamp(t) => Some(*t as f64),
            _ => None,
        }
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            AttributeValue::Category(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Number(x) => write!(f, "{x}"),
            AttributeValue::Category(s) => f.write_str(s),
            AttributeValue::Timestamp(t) => write!(f, "{t}"),
            AttributeValue::Missing => f.write_str("(missing)"),
        }
    }
}
