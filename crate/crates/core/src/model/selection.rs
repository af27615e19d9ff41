use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::dataset::{Dataset, OccurrenceId, SequenceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
}

/// Sequences and occurrences picked by an interaction or a query.
///
/// Occurrences are stored with their owning sequence so that set algebra can
/// restore the containment invariant without access to the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionSet {
    pub dataset_version: u64,
    pub sequence_ids: BTreeSet<SequenceId>,
    /// occurrence id -> owning sequence id
    pub occurrence_ids: BTreeMap<OccurrenceId, SequenceId>,
    pub origin: String,
}

impl SelectionSet {
    pub fn empty(dataset_version: u64, origin: impl Into<String>) -> Self {
        SelectionSet {
            dataset_version,
            sequence_ids: BTreeSet::new(),
            occurrence_ids: BTreeMap::new(),
            origin: origin.into(),
        }
    }

    /// Every sequence and occurrence of the dataset.
    pub fn all(dataset: &Dataset) -> Self {
        let mut s = SelectionSet::empty(dataset.version(), "all");
        for seq in dataset.sequences() {
            s.add_sequence(dataset, &seq.id);
        }
        s
    }

    /// Explicitly listed sequences contribute all their occurrences; listed
    /// occurrences pull in their owning sequence.
    pub fn from_ids(
        dataset: &Dataset,
        sequence_ids: impl IntoIterator<Item = SequenceId>,
        occurrence_ids: impl IntoIterator<Item = OccurrenceId>,
        origin: impl Into<String>,
    ) -> Result<Self> {
        let mut s = SelectionSet::empty(dataset.version(), origin);
        for id in sequence_ids {
            if dataset.sequence(&id).is_none() {
                return Err(Error::NotFound(format!("sequence `{id}`")));
            }
            s.add_sequence(dataset, &id);
        }
        for id in occurrence_ids {
            let (seq, _) = dataset
                .occurrence(id)
                .ok_or_else(|| Error::NotFound(format!("occurrence {id}")))?;
            s.sequence_ids.insert(seq.id.clone());
            s.occurrence_ids.insert(id, seq.id.clone());
        }
        Ok(s)
    }

    pub(crate) fn add_sequence(&mut self, dataset: &Dataset, id: &SequenceId) {
        if let Some(seq) = dataset.sequence(id) {
            self.sequence_ids.insert(seq.id.clone());
            for e in &seq.events {
                self.occurrence_ids.insert(e.id, seq.id.clone());
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sequence_ids.is_empty()
    }

    pub fn contains_occurrence(&self, id: OccurrenceId) -> bool {
        self.occurrence_ids.contains_key(&id)
    }

    /// Drops occurrences whose sequence is no longer selected.
    fn normalize(mut self) -> Self {
        let seqs = &self.sequence_ids;
        self.occurrence_ids.retain(|_, s| seqs.contains(s));
        self
    }

    pub fn check_version(&self, dataset: &Dataset) -> Result<()> {
        if self.dataset_version != dataset.version() {
            return Err(Error::StaleSelection {
                selection: self.dataset_version,
                dataset: dataset.version(),
            });
        }
        Ok(())
    }
}

pub fn selection_combine(a: &SelectionSet, b: &SelectionSet, op: SetOp) -> Result<SelectionSet> {
    if a.dataset_version != b.dataset_version {
        return Err(Error::StaleSelection {
            selection: b.dataset_version,
            dataset: a.dataset_version,
        });
    }
    let (sequence_ids, occurrence_ids) = match op {
        SetOp::Union => {
            let mut occ = a.occurrence_ids.clone();
            occ.extend(b.occurrence_ids.iter().map(|(k, v)| (*k, v.clone())));
            (&a.sequence_ids | &b.sequence_ids, occ)
        }
        SetOp::Intersect => (
            &a.sequence_ids & &b.sequence_ids,
            a.occurrence_ids
                .iter()
                .filter(|(k, _)| b.occurrence_ids.contains_key(k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        ),
        SetOp::Difference => (
            &a.sequence_ids - &b.sequence_ids,
            a.occurrence_ids
                .iter()
                .filter(|(k, _)| !b.occurrence_ids.contains_key(k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        ),
    };
    let origin = format!("({}) {:?} ({})", a.origin, op, b.origin).to_lowercase();
    Ok(SelectionSet { dataset_version: a.dataset_version, sequence_ids, occurrence_ids, origin }
        .normalize())
}
