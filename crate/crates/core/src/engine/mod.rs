//! Session state, the action protocol, per-panel summaries and batch
//! pipelines.

mod action;
mod panels;
mod pipeline;
mod session;

pub use action::{Action, EventBoxRequest};
pub use panels::{
    attributes_panel, clusters_panel, events_panel, individual_panel, panel, unique_panel, AttributeBars,
    AttributesPanel, Cell, ClusterOverview, ClustersPanel, EventsPanel, IndividualPanel, IndividualRow, Page,
    PanelKind, Share, UniquePanel, UniqueRow,
};
pub use pipeline::{execute_pipeline, run_pipeline, write_artifacts, Output, PipelineConfig, PipelineRun};
pub use session::{ActionOutcome, DatasetSummary, Engine, SessionState};
