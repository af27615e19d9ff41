use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::eventbox::EventBoxConfig;
use crate::ingest::{IngestConfig, SyntheticConfig};
use crate::model::{OccurrenceId, SequenceId, SetOp};
use crate::stats::ReportConfig;
use crate::transforms::{AnchorSpec, MergeRule};

/// Which EventBox to build: all selected occurrences of `event_type`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventBoxRequest {
    pub event_type: String,
    #[serde(default)]
    pub config: EventBoxConfig,
}

/// Everything a session can be asked to do. Serialised as
/// `{"action": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", content = "params", rename_all = "snake_case")]
pub enum Action {
    Load(IngestConfig),
    Synthetic(SyntheticConfig),
    SubstituteAggregate {
        source_types: BTreeSet<String>,
        new_type: String,
        /// Per-attribute merge rules replacing the kind defaults.
        #[serde(default)]
        rules: BTreeMap<String, MergeRule>,
    },
    Align {
        anchors: AnchorSpec,
    },
    Sort {
        event_type: String,
    },
    Cluster {
        k: usize,
    },
    /// Labels from a `sequence_id,label` CSV file or inline text.
    ImportLabels {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
    },
    SelectQuery {
        query: String,
    },
    SelectIds {
        #[serde(default)]
        sequence_ids: Vec<SequenceId>,
        #[serde(default)]
        occurrence_ids: Vec<OccurrenceId>,
    },
    /// Combines the current selection with a query result or an id list.
    SelectCombine {
        op: SetOp,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        query: Option<String>,
        #[serde(default)]
        sequence_ids: Vec<SequenceId>,
        #[serde(default)]
        occurrence_ids: Vec<OccurrenceId>,
    },
    BuildEventbox(EventBoxRequest),
    Breakdown(EventBoxRequest),
    /// Merges the breakdown children of a box whose breakdown value is listed.
    Merge {
        #[serde(flatten)]
        request: EventBoxRequest,
        values: Vec<String>,
    },
    Report(ReportConfig),
    ResetSelection,
    Undo,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Load(_) => "load",
            Action::Synthetic(_) => "synthetic",
            Action::SubstituteAggregate { .. } => "substitute_aggregate",
            Action::Align { .. } => "align",
            Action::Sort { .. } => "sort",
            Action::Cluster { .. } => "cluster",
            Action::ImportLabels { .. } => "import_labels",
            Action::SelectQuery { .. } => "select_query",
            Action::SelectIds { .. } => "select_ids",
            Action::SelectCombine { .. } => "select_combine",
            Action::BuildEventbox(_) => "build_eventbox",
            Action::Breakdown(_) => "breakdown",
            Action::Merge { .. } => "merge",
            Action::Report(_) => "report",
            Action::ResetSelection => "reset_selection",
            Action::Undo => "undo",
        }
    }

    /// Reads compute a result from the current state and never change it.
    pub fn is_read(&self) -> bool {
        matches!(self, Action::BuildEventbox(_) | Action::Breakdown(_) | Action::Merge { .. } | Action::Report(_))
    }
}
