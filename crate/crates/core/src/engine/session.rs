use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::eventbox::{breakdown, build_eventbox, merge, EventBox};
use crate::grouping::{cluster, import_labels, ClusterAssignment};
use crate::ingest::{generate_synthetic, load_dataset, IngestConfig, QualityReport};
use crate::model::{selection_combine, Dataset, SelectionSet};
use crate::query::{evaluate_query, parse_query};
use crate::stats::{generate_report, ReportConfig, StatReport};
use crate::transforms::{align, sort_by_event, substitute_aggregate, AlignedView, MergePolicy};

use super::action::{Action, EventBoxRequest};

/// Immutable snapshot of a session. Every mutating action produces a new one.
#[derive(Debug, Clone, Default)]
pub struct SessionState {
    pub state_version: u64,
    pub dataset: Option<Arc<Dataset>>,
    pub quality: Option<QualityReport>,
    pub clusters: Option<Arc<ClusterAssignment>>,
    pub view: Option<Arc<AlignedView>>,
    /// Present whenever a dataset is.
    pub selection: Option<SelectionSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub version: u64,
    pub n_sequences: usize,
    pub n_events: usize,
    pub event_types: Vec<String>,
}

impl DatasetSummary {
    pub fn of(d: &Dataset) -> Self {
        DatasetSummary {
            version: d.version(),
            n_sequences: d.sequences().len(),
            n_events: d.n_events(),
            event_types: d.event_types(),
        }
    }
}

impl SessionState {
    pub fn dataset(&self) -> Result<&Arc<Dataset>> {
        self.dataset.as_ref().ok_or_else(|| Error::State("no dataset loaded; run load or synthetic first".into()))
    }

    pub fn selection(&self) -> Result<&SelectionSet> {
        self.dataset()?;
        Ok(self.selection.as_ref().expect("selection accompanies dataset"))
    }

    pub fn clusters(&self) -> Option<&ClusterAssignment> {
        self.clusters.as_deref()
    }

    /// The aligned view, or the unaligned layout when none was computed.
    pub fn view_or_unaligned(&self) -> Result<AlignedView> {
        let d = self.dataset()?;
        Ok(match &self.view {
            Some(v) => (**v).clone(),
            None => AlignedView::unaligned(d),
        })
    }

    pub fn eventbox(&self, req: &EventBoxRequest) -> Result<EventBox> {
        build_eventbox(self.dataset()?, self.clusters(), self.selection()?, &req.event_type, &req.config)
    }

    pub fn breakdown(&self, req: &EventBoxRequest) -> Result<Vec<EventBox>> {
        breakdown(&self.eventbox(req)?)
    }

    pub fn merge(&self, req: &EventBoxRequest, values: &[String]) -> Result<EventBox> {
        let children = self.breakdown(req)?;
        let mut picked = Vec::new();
        for v in values {
            let child = children
                .iter()
                .find(|c| c.breakdown_value.as_deref() == Some(v.as_str()))
                .ok_or_else(|| Error::NotFound(format!("breakdown value `{v}`")))?;
            picked.push(child.clone());
        }
        merge(&picked)
    }

    pub fn report(&self, config: &ReportConfig) -> Result<StatReport> {
        generate_report(self.dataset()?, self.clusters(), self.selection()?, config)
    }

    /// Result of a read action.
    pub fn read(&self, action: &Action) -> Result<Value> {
        Ok(match action {
            Action::BuildEventbox(req) => serde_json::to_value(self.eventbox(req)?)?,
            Action::Breakdown(req) => serde_json::to_value(self.breakdown(req)?)?,
            Action::Merge { request, values } => serde_json::to_value(self.merge(request, values)?)?,
            Action::Report(config) => serde_json::to_value(self.report(config)?)?,
            other => return Err(Error::State(format!("`{}` is not a read action", other.name()))),
        })
    }

    /// Canonical JSON of the whole state; identical states give identical text.
    pub fn canonical_json(&self) -> Result<String> {
        let v = json!({
            "state_version": self.state_version,
            "dataset": self.dataset.as_deref(),
            "quality": self.quality,
            "clusters": self.clusters.as_deref(),
            "view": self.view.as_deref(),
            "selection": self.selection,
        });
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn summary(&self) -> Value {
        json!({
            "state_version": self.state_version,
            "dataset": self.dataset.as_deref().map(DatasetSummary::of),
            "clustered": self.clusters.as_ref().map(|c| c.k),
            "aligned": self.view.as_ref().map(|v| v.column_count),
            "selection": self.selection.as_ref().map(|s| json!({
                "origin": s.origin,
                "n_sequences": s.sequence_ids.len(),
                "n_occurrences": s.occurrence_ids.len(),
            })),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionOutcome {
    pub state_version: u64,
    pub action: String,
    pub result: Value,
}

/// Applies actions to a session, keeping the snapshots needed for undo and
/// the log needed for replay.
#[derive(Debug, Default)]
pub struct Engine {
    current: Arc<SessionState>,
    history: Vec<Arc<SessionState>>,
    log: Vec<Action>,
    base_dir: Option<PathBuf>,
}

fn view_summary(v: &AlignedView) -> Value {
    json!({ "column_count": v.column_count, "anchor_columns": v.anchor_columns, "rows": v.rows.len() })
}

fn selection_summary(s: &SelectionSet) -> Value {
    json!({ "origin": s.origin, "n_sequences": s.sequence_ids.len(), "n_occurrences": s.occurrence_ids.len() })
}

fn cluster_summary(c: &ClusterAssignment) -> Value {
    json!({ "k": c.k, "method": c.method, "sizes": c.sizes() })
}

impl Engine {
    /// `base_dir` anchors relative file paths in actions.
    pub fn new(base_dir: Option<PathBuf>) -> Self {
        Engine { base_dir, ..Default::default() }
    }

    pub fn state(&self) -> Arc<SessionState> {
        Arc::clone(&self.current)
    }

    pub fn state_version(&self) -> u64 {
        self.current.state_version
    }

    /// Successful mutating actions in order.
    pub fn log(&self) -> &[Action] {
        &self.log
    }

    pub fn replay(actions: &[Action], base_dir: Option<PathBuf>) -> Result<Engine> {
        let mut e = Engine::new(base_dir);
        for a in actions {
            e.apply(a, None)?;
        }
        Ok(e)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Applies one action. A supplied `expected_version` must equal the
    /// current state version.
    pub fn apply(&mut self, action: &Action, expected_version: Option<u64>) -> Result<ActionOutcome> {
        if let Some(expected) = expected_version {
            if expected != self.current.state_version {
                return Err(Error::Conflict { expected, actual: self.current.state_version });
            }
        }
        let started = Instant::now();
        let outcome = if action.is_read() {
            let result = self.current.read(action)?;
            ActionOutcome { state_version: self.current.state_version, action: action.name().into(), result }
        } else {
            let (next, result) = self.mutate(action)?;
            if matches!(action, Action::Undo) {
                self.history.pop();
            } else {
                self.history.push(Arc::clone(&self.current));
            }
            self.current = Arc::new(next);
            self.log.push(action.clone());
            ActionOutcome { state_version: self.current.state_version, action: action.name().into(), result }
        };
        log::info!(
            "{} -> state {} in {:.1} ms",
            action.name(),
            outcome.state_version,
            started.elapsed().as_secs_f64() * 1e3
        );
        Ok(outcome)
    }

    fn mutate(&self, action: &Action) -> Result<(SessionState, Value)> {
        let cur = &*self.current;
        let mut next = cur.clone();
        next.state_version = cur.state_version + 1;
        let fresh = |next: &mut SessionState, d: Dataset| {
            next.selection = Some(SelectionSet::all(&d));
            next.dataset = Some(Arc::new(d));
            next.view = None;
        };
        let result = match action {
            Action::Load(config) => {
                let mut config: IngestConfig = config.clone();
                config.events_path = self.resolve(&config.events_path);
                config.sequence_attrs_path = config.sequence_attrs_path.as_deref().map(|p| self.resolve(p));
                let (d, quality) = load_dataset(&config)?;
                let summary = DatasetSummary::of(&d);
                fresh(&mut next, d);
                next.clusters = None;
                next.quality = Some(quality.clone());
                json!({ "dataset": summary, "quality": quality })
            }
            Action::Synthetic(config) => {
                let d = generate_synthetic(config)?;
                let summary = DatasetSummary::of(&d);
                fresh(&mut next, d);
                next.clusters = None;
                next.quality = None;
                json!({ "dataset": summary })
            }
            Action::SubstituteAggregate { source_types, new_type, rules } => {
                let d = cur.dataset()?;
                let policy = MergePolicy::with_overrides(d.schema(), rules);
                let out = substitute_aggregate(d, source_types, new_type, &policy)?;
                let summary = DatasetSummary::of(&out);
                fresh(&mut next, out);
                json!({ "dataset": summary })
            }
            Action::Align { anchors } => {
                let v = align(cur.dataset()?, anchors);
                let s = view_summary(&v);
                next.view = Some(Arc::new(v));
                s
            }
            Action::Sort { event_type } => {
                let v = sort_by_event(cur.dataset()?, &cur.view_or_unaligned()?, event_type)?;
                let s = view_summary(&v);
                next.view = Some(Arc::new(v));
                s
            }
            Action::Cluster { k } => {
                let c = cluster(cur.dataset()?, *k)?;
                let s = cluster_summary(&c);
                next.clusters = Some(Arc::new(c));
                s
            }
            Action::ImportLabels { path, csv } => {
                let d = cur.dataset()?;
                let c = match (path, csv) {
                    (Some(p), None) => import_labels(d, std::fs::File::open(self.resolve(p))?)?,
                    (None, Some(text)) => import_labels(d, text.as_bytes())?,
                    _ => return Err(Error::Config("import_labels needs exactly one of path or csv".into())),
                };
                let s = cluster_summary(&c);
                next.clusters = Some(Arc::new(c));
                s
            }
            Action::SelectQuery { query } => {
                let d = cur.dataset()?;
                let ast = parse_query(query, d.schema())?;
                let sel = evaluate_query(&ast, d, cur.clusters())?;
                let s = selection_summary(&sel);
                next.selection = Some(sel);
                s
            }
            Action::SelectIds { sequence_ids, occurrence_ids } => {
                let d = cur.dataset()?;
                let sel = SelectionSet::from_ids(d, sequence_ids.clone(), occurrence_ids.clone(), "ids")?;
                let s = selection_summary(&sel);
                next.selection = Some(sel);
                s
            }
            Action::SelectCombine { op, query, sequence_ids, occurrence_ids } => {
                let d = cur.dataset()?;
                let other = match query {
                    Some(q) => evaluate_query(&parse_query(q, d.schema())?, d, cur.clusters())?,
                    None => SelectionSet::from_ids(d, sequence_ids.clone(), occurrence_ids.clone(), "ids")?,
                };
                let sel = selection_combine(cur.selection()?, &other, *op)?;
                let s = selection_summary(&sel);
                next.selection = Some(sel);
                s
            }
            Action::ResetSelection => {
                let sel = SelectionSet::all(cur.dataset()?);
                let s = selection_summary(&sel);
                next.selection = Some(sel);
                s
            }
            Action::Undo => {
                let prev = self.history.last().ok_or_else(|| Error::State("nothing to undo".into()))?;
                next = (**prev).clone();
                next.state_version = cur.state_version + 1;
                next.selection = next.dataset.as_deref().map(SelectionSet::all);
                next.summary()
            }
            read => return Err(Error::State(format!("`{}` does not change state", read.name()))),
        };
        Ok((next, result))
    }
}
