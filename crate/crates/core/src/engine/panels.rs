//! Per-panel summaries served to the coordinated views: event-type counts,
//! cluster overviews, unique and individual sequence lists and attribute
//! distributions for the whole dataset against the current selection.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::eventbox::quantile_sorted;
use crate::grouping::{unique_sequences, Resolver};
use crate::model::{AttrRef, AttributeKind, Level, OccurrenceId, SequenceId, ValueType, DAY_OF_WEEK, DURATION};
use crate::stats::level_order;

use super::session::SessionState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelKind {
    Events,
    Clusters,
    Unique,
    Individual,
    Attributes,
}

impl FromStr for PanelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "events" => PanelKind::Events,
            "clusters" => PanelKind::Clusters,
            "unique" => PanelKind::Unique,
            "individual" => PanelKind::Individual,
            "attributes" => PanelKind::Attributes,
            other => return Err(Error::NotFound(format!("panel `{other}`"))),
        })
    }
}

/// Row window for the individual-sequence panel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Page {
    #[serde(default)]
    pub offset: usize,
    #[serde(default)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Share {
    pub label: String,
    pub count: usize,
    pub proportion: f64,
    pub selected: usize,
    pub selected_proportion: f64,
}

fn share(label: String, count: usize, total: usize, selected: usize, selected_total: usize) -> Share {
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Share { label, count, proportion: ratio(count, total), selected, selected_proportion: ratio(selected, selected_total) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventsPanel {
    pub state_version: u64,
    pub total_events: usize,
    pub selected_events: usize,
    pub unique_event_types: usize,
    pub event_types: Vec<Share>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterOverview {
    pub label: String,
    pub size: usize,
    pub proportion: f64,
    pub selected: usize,
    pub unique_sequences: usize,
    pub mean_length: f64,
    /// Most common signature in the cluster.
    pub top_signature: Vec<String>,
    pub event_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClustersPanel {
    pub state_version: u64,
    pub method: Option<String>,
    pub clusters: Vec<ClusterOverview>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniqueRow {
    pub signature: Vec<String>,
    pub count: usize,
    pub selected: usize,
    pub sequence_ids: Vec<SequenceId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquePanel {
    pub state_version: u64,
    pub total_sequences: usize,
    pub uniques: Vec<UniqueRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub occurrence_id: OccurrenceId,
    pub event_type: String,
    pub start: i64,
    pub end: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndividualRow {
    pub sequence_id: SequenceId,
    pub selected: bool,
    pub cluster: Option<String>,
    /// `null` cells are gaps.
    pub cells: Vec<Option<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndividualPanel {
    pub state_version: u64,
    pub total_rows: usize,
    pub offset: usize,
    pub column_count: usize,
    pub anchor_columns: BTreeMap<String, usize>,
    pub rows: Vec<IndividualRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeBars {
    pub name: String,
    pub level: Level,
    pub kind: AttributeKind,
    /// Counting unit: sequences for sequence-level attributes, occurrences otherwise.
    pub total: usize,
    pub selected_total: usize,
    pub bars: Vec<Share>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributesPanel {
    pub state_version: u64,
    pub attributes: Vec<AttributeBars>,
}

pub fn panel(state: &SessionState, kind: PanelKind, page: Page) -> Result<Value> {
    Ok(match kind {
        PanelKind::Events => serde_json::to_value(events_panel(state)?)?,
        PanelKind::Clusters => serde_json::to_value(clusters_panel(state)?)?,
        PanelKind::Unique => serde_json::to_value(unique_panel(state)?)?,
        PanelKind::Individual => serde_json::to_value(individual_panel(state, page)?)?,
        PanelKind::Attributes => serde_json::to_value(attributes_panel(state)?)?,
    })
}

pub fn events_panel(state: &SessionState) -> Result<EventsPanel> {
    let d = state.dataset()?;
    let sel = state.selection()?;
    let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();
    for (_, e) in d.occurrences() {
        let c = counts.entry(e.event_type.as_str()).or_default();
        c.0 += 1;
        if sel.contains_occurrence(e.id) {
            c.1 += 1;
        }
    }
    let total = d.n_events();
    let selected = sel.occurrence_ids.len();
    let mut types: Vec<Share> = d
        .event_types()
        .into_iter()
        .map(|t| {
            let (c, s) = counts[t.as_str()];
            share(t, c, total, s, selected)
        })
        .collect();
    types.sort_by(|a, b| b.count.cmp(&a.count).then(a.label.cmp(&b.label)));
    Ok(EventsPanel {
        state_version: state.state_version,
        total_events: total,
        selected_events: selected,
        unique_event_types: types.len(),
        event_types: types,
    })
}

pub fn clusters_panel(state: &SessionState) -> Result<ClustersPanel> {
    let d = state.dataset()?;
    let sel = state.selection()?;
    let Some(c) = state.clusters() else {
        return Ok(ClustersPanel { state_version: state.state_version, method: None, clusters: Vec::new() });
    };
    let total = d.sequences().len();
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in d.sequences().iter().enumerate() {
        if let Some(l) = c.label(&s.id) {
            members.entry(l).or_default().push(i);
        }
    }
    let clusters = c
        .ordered_labels()
        .into_iter()
        .filter_map(|label| {
            let idx = members.get(label.as_str())?;
            let mut sigs: BTreeMap<Vec<&str>, usize> = BTreeMap::new();
            let mut event_counts = BTreeMap::new();
            let mut events = 0;
            for i in idx {
                let s = &d.sequences()[*i];
                *sigs.entry(s.signature()).or_default() += 1;
                events += s.events.len();
                for e in &s.events {
                    *event_counts.entry(e.event_type.clone()).or_default() += 1;
                }
            }
            let top = sigs.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(s, _)| s.clone());
            Some(ClusterOverview {
                size: idx.len(),
                proportion: idx.len() as f64 / total as f64,
                selected: idx.iter().filter(|i| sel.sequence_ids.contains(&d.sequences()[**i].id)).count(),
                unique_sequences: sigs.len(),
                mean_length: events as f64 / idx.len() as f64,
                top_signature: top.unwrap_or_default().into_iter().map(String::from).collect(),
                event_counts,
                label,
            })
        })
        .collect();
    Ok(ClustersPanel { state_version: state.state_version, method: Some(c.method.clone()), clusters })
}

pub fn unique_panel(state: &SessionState) -> Result<UniquePanel> {
    let d = state.dataset()?;
    let sel = state.selection()?;
    let uniques = unique_sequences(d)
        .into_iter()
        .map(|u| UniqueRow {
            selected: u.sequence_ids.iter().filter(|id| sel.sequence_ids.contains(*id)).count(),
            signature: u.signature,
            count: u.count,
            sequence_ids: u.sequence_ids,
        })
        .collect();
    Ok(UniquePanel { state_version: state.state_version, total_sequences: d.sequences().len(), uniques })
}

pub fn individual_panel(state: &SessionState, page: Page) -> Result<IndividualPanel> {
    let d = state.dataset()?;
    let sel = state.selection()?;
    let view = state.view_or_unaligned()?;
    let limit = page.limit.unwrap_or(usize::MAX);
    let rows = view
        .rows
        .iter()
        .skip(page.offset)
        .take(limit)
        .map(|r| IndividualRow {
            sequence_id: r.sequence_id.clone(),
            selected: sel.sequence_ids.contains(&r.sequence_id),
            cluster: state.clusters().and_then(|c| c.label(&r.sequence_id)).map(String::from),
            cells: r
                .cells
                .iter()
                .map(|c| {
                    c.and_then(|id| d.occurrence(id)).map(|(_, e)| Cell {
                        occurrence_id: e.id,
                        event_type: e.event_type.clone(),
                        start: e.start,
                        end: e.end,
                    })
                })
                .collect(),
        })
        .collect();
    Ok(IndividualPanel {
        state_version: state.state_version,
        total_rows: view.rows.len(),
        offset: page.offset,
        column_count: view.column_count,
        anchor_columns: view.anchor_columns.clone(),
        rows,
    })
}

fn attribute_bars(state: &SessionState, attr: &AttrRef) -> Result<AttributeBars> {
    let d = state.dataset()?;
    let sel = state.selection()?;
    let r = Resolver::new(d, state.clusters());
    let mut values: Vec<(crate::model::AttributeValue, bool)> = Vec::new();
    if attr.level == Level::Sequence {
        for s in d.sequences() {
            values.push((r.sequence_value(s, attr), sel.sequence_ids.contains(&s.id)));
        }
    } else {
        for (s, e) in d.occurrences() {
            values.push((r.value(s, e, attr), sel.contains_occurrence(e.id)));
        }
    }
    let total = values.len();
    let selected_total = values.iter().filter(|v| v.1).count();
    let labels: Vec<(String, bool)> = match attr.value_type {
        ValueType::Category => values
            .iter()
            .map(|(v, s)| (v.as_category().unwrap_or(crate::eventbox::MISSING_LABEL).to_string(), *s))
            .collect(),
        _ => {
            let mut xs: Vec<f64> = values.iter().filter_map(|(v, _)| v.as_f64()).collect();
            xs.sort_by(|a, b| a.total_cmp(b));
            let cuts: Vec<f64> = if xs.is_empty() {
                Vec::new()
            } else {
                [0.0, 0.2, 0.4, 0.6, 0.8, 1.0].iter().map(|q| quantile_sorted(&xs, *q)).collect()
            };
            values
                .iter()
                .map(|(v, s)| {
                    let label = match v.as_f64() {
                        Some(x) => {
                            let q = 1 + cuts[1..5].iter().filter(|c| x > **c).count();
                            format!("Q{q} [{}, {}]", cuts[q - 1], cuts[q])
                        }
                        None => crate::eventbox::MISSING_LABEL.to_string(),
                    };
                    (label, *s)
                })
                .collect()
        }
    };
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (l, s) in &labels {
        let c = counts.entry(l.as_str()).or_default();
        c.0 += 1;
        if *s {
            c.1 += 1;
        }
    }
    let missing = counts.remove(crate::eventbox::MISSING_LABEL);
    let mut order = level_order(attr, counts.keys().copied());
    if missing.is_some() {
        order.push(crate::eventbox::MISSING_LABEL.to_string());
        counts.insert(crate::eventbox::MISSING_LABEL, missing.unwrap_or_default());
    }
    let bars = order
        .into_iter()
        .map(|l| {
            let (c, s) = counts[l.as_str()];
            share(l, c, total, s, selected_total)
        })
        .collect();
    Ok(AttributeBars { name: attr.name.clone(), level: attr.level, kind: attr.kind, total, selected_total, bars })
}

pub fn attributes_panel(state: &SessionState) -> Result<AttributesPanel> {
    let d = state.dataset()?;
    let mut names: Vec<String> = d.schema().attributes().iter().map(|a| a.name.clone()).collect();
    names.push(DAY_OF_WEEK.into());
    names.push(DURATION.into());
    let attributes = names
        .iter()
        .map(|n| attribute_bars(state, &d.schema().lookup(n)?))
        .collect::<Result<_>>()?;
    Ok(AttributesPanel { state_version: state.state_version, attributes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Action, Engine};
    use crate::ingest::SyntheticConfig;

    fn engine() -> Engine {
        let mut e = Engine::new(None);
        e.apply(&Action::Synthetic(SyntheticConfig::new(120, 5)), None).unwrap();
        e
    }

    #[test]
    fn events_totals_and_selection() {
        let mut e = engine();
        let p = events_panel(&e.state()).unwrap();
        assert_eq!(p.event_types.iter().map(|s| s.count).sum::<usize>(), p.total_events);
        assert!(p.event_types.iter().all(|s| s.selected == s.count));
        e.apply(&Action::SelectQuery { query: "clinic = 'B'".into() }, None).unwrap();
        let q = events_panel(&e.state()).unwrap();
        assert!(q.selected_events < q.total_events);
        let sum: f64 = q.event_types.iter().map(|s| s.selected_proportion).sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clusters_cover_dataset() {
        let mut e = engine();
        assert!(clusters_panel(&e.state()).unwrap().clusters.is_empty());
        e.apply(&Action::Cluster { k: 4 }, None).unwrap();
        let p = clusters_panel(&e.state()).unwrap();
        assert_eq!(p.clusters.len(), 4);
        assert_eq!(p.clusters.iter().map(|c| c.size).sum::<usize>(), 120);
        assert!(p.clusters.windows(2).all(|w| w[0].size >= w[1].size));
    }

    #[test]
    fn unique_and_individual() {
        let e = engine();
        let u = unique_panel(&e.state()).unwrap();
        assert_eq!(u.uniques.iter().map(|r| r.count).sum::<usize>(), 120);
        let page = individual_panel(&e.state(), Page { offset: 100, limit: Some(50) }).unwrap();
        assert_eq!(page.total_rows, 120);
        assert_eq!(page.rows.len(), 20);
        assert!(page.rows.iter().all(|r| r.cells.len() == page.column_count));
    }

    #[test]
    fn attribute_bars_partition() {
        let e = engine();
        let p = attributes_panel(&e.state()).unwrap();
        let names: Vec<&str> = p.attributes.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["age", "urgency", "clinic", "staff", "day_of_week", "duration"]);
        for a in &p.attributes {
            assert_eq!(a.bars.iter().map(|b| b.count).sum::<usize>(), a.total, "{}", a.name);
        }
        let dow = &p.attributes[4];
        assert_eq!(dow.bars[0].label, "Mon");
        let age = &p.attributes[0];
        assert_eq!(age.bars.last().unwrap().label, crate::eventbox::MISSING_LABEL);
    }

    #[test]
    fn kind_names() {
        assert_eq!("unique".parse::<PanelKind>().unwrap(), PanelKind::Unique);
        assert_eq!("sankey".parse::<PanelKind>().unwrap_err().code(), "NotFoundError");
    }
}
