//! Unique-sequence aggregation and the stand-in clustering that backs
//! `Cluster ID` predicates.

mod cluster;
mod distance;
mod resolve;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Dataset, SequenceId};

pub use cluster::{cluster, export_labels, import_labels, ClusterAssignment};
pub use distance::{levenshtein, signature_distance};
pub use resolve::Resolver;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniqueSequence {
    pub signature: Vec<String>,
    pub sequence_ids: Vec<SequenceId>,
    pub count: usize,
}

/// Sequences grouped by exact event-type signature, most frequent first
/// (ties by signature).
pub fn unique_sequences(dataset: &Dataset) -> Vec<UniqueSequence> {
    let mut groups: BTreeMap<Vec<&str>, Vec<SequenceId>> = BTreeMap::new();
    for s in dataset.sequences() {
        groups.entry(s.signature()).or_default().push(s.id.clone());
    }
    let mut out: Vec<UniqueSequence> = groups
        .into_iter()
        .map(|(sig, ids)| UniqueSequence {
            signature: sig.into_iter().map(String::from).collect(),
            count: ids.len(),
            sequence_ids: ids,
        })
        .collect();
    // BTreeMap order already sorts signatures; the stable sort keeps it for ties.
    out.sort_by(|a, b| b.count.cmp(&a.count));
    out
}
