//! User-driven transformations: substitution with aggregation, hard/soft
//! anchor alignment and event-based sorting. Each returns a new value and
//! leaves its input untouched, so they compose in any order.

pub(crate) mod align;
mod sort;
mod substitute;

pub use align::{align, AlignedRow, AlignedView, Anchor, AnchorSpec, AnchorStrength};
pub use sort::sort_by_event;
pub use substitute::{substitute_aggregate, MergePolicy, MergeRule};
