use crate::error::{Error, Result};
use crate::model::{AttrRef, AttributeValue, Dataset, Derived, EventOccurrence, Sequence};

use super::ClusterAssignment;

/// Attribute lookup that also answers the virtual `cluster` attribute when a
/// clustering is available.
#[derive(Clone, Copy)]
pub struct Resolver<'a> {
    pub dataset: &'a Dataset,
    pub clusters: Option<&'a ClusterAssignment>,
}

impl<'a> Resolver<'a> {
    pub fn new(dataset: &'a Dataset, clusters: Option<&'a ClusterAssignment>) -> Self {
        Resolver { dataset, clusters }
    }

    pub fn lookup(&self, name: &str) -> Result<AttrRef> {
        let attr = self.dataset.schema().lookup(name)?;
        if attr.derived == Some(Derived::Cluster) && self.clusters.is_none() {
            return Err(Error::State("attribute `cluster` needs a clustering; run cluster first".into()));
        }
        Ok(attr)
    }

    pub fn value(&self, seq: &Sequence, ev: &EventOccurrence, attr: &AttrRef) -> AttributeValue {
        if attr.derived == Some(Derived::Cluster) {
            return self.cluster_of(seq);
        }
        self.dataset.value(seq, ev, attr)
    }

    /// Value of a sequence-level attribute (stored or `cluster`).
    pub fn sequence_value(&self, seq: &Sequence, attr: &AttrRef) -> AttributeValue {
        if attr.derived == Some(Derived::Cluster) {
            return self.cluster_of(seq);
        }
        seq.attrs.get(&attr.name).cloned().unwrap_or_default()
    }

    fn cluster_of(&self, seq: &Sequence) -> AttributeValue {
        self.clusters
            .and_then(|c| c.label(&seq.id))
            .map(|l| AttributeValue::Category(l.to_string()))
            .unwrap_or_default()
    }
}
