//! Typed data model: schema, attribute values, event occurrences, sequences,
//! datasets and selection sets.

mod dataset;
mod schema;
mod selection;
mod time;
mod value;

pub use dataset::{
    resolve_attribute, Dataset, EventOccurrence, OccurrenceId, ProvenanceEntry, Sequence,
    SequenceId,
};
pub use schema::{AttrRef, AttributeDef, AttributeKind, AttributeSchema, Derived, Level, ValueType, RESERVED};
pub use selection::{selection_combine, SelectionSet, SetOp};
pub use time::{weekday_index, TimeZoneSpec, WEEKDAYS};
pub use value::AttributeValue;

/// Derived event-level attribute names, always available on every dataset.
pub const DURATION: &str = "duration";
pub const START_TIME_OF_DAY: &str = "start_time_of_day";
pub const DAY_OF_WEEK: &str = "day_of_week";
pub const START: &str = "start";
pub const END: &str = "end";
pub const EVENT_TYPE: &str = "event_type";
/// Virtual sequence-level attribute backed by a cluster assignment.
pub const CLUSTER: &str = "cluster";
