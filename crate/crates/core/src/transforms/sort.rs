use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Dataset, ProvenanceEntry};

use super::align::AlignedView;

/// Orders rows by the GAP-free run of event types starting at the first
/// `sort_type` cell. Rows without `sort_type` follow, in their prior order.
pub fn sort_by_event(dataset: &Dataset, view: &AlignedView, sort_type: &str) -> Result<AlignedView> {
    if view.dataset_version != dataset.version() {
        return Err(Error::State(format!(
            "view was built on dataset version {}, current is {}",
            view.dataset_version,
            dataset.version()
        )));
    }
    let ty = |id| {
        dataset
            .occurrence(id)
            .map(|(_, e)| e.event_type.as_str())
            .ok_or_else(|| Error::NotFound(format!("occurrence {id}")))
    };
    let mut keyed = Vec::with_capacity(view.rows.len());
    for row in &view.rows {
        let types = row.occurrences().map(ty).collect::<Result<Vec<&str>>>()?;
        let key = types.iter().position(|t| *t == sort_type).map(|p| types[p..].to_vec());
        keyed.push((key, row));
    }
    keyed.sort_by(|(a, _), (b, _)| match (a, b) {
        (Some(a), Some(b)) => a.cmp(b),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    });
    let mut out = view.clone();
    out.rows = keyed.into_iter().map(|(_, r)| r.clone()).collect();
    out.steps.push(ProvenanceEntry {
        op: "sort".into(),
        params: serde_json::json!({ "event_type": sort_type }),
        input_version: Some(dataset.version()),
        output_version: dataset.version(),
    });
    Ok(out)
}
