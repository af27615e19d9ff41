use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::{weekday_index, OccurrenceId};

use super::CategoryOrder;

pub const MISSING_LABEL: &str = "(missing)";
pub const OTHER_LABEL: &str = "Other";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    H,
    V,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stack {
    pub value: String,
    pub count: usize,
    pub occurrence_ids: Vec<OccurrenceId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub label: String,
    /// Bin bounds for numeric axes.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub total: usize,
    pub occurrence_ids: Vec<OccurrenceId>,
    /// Empty unless the axis has a secondary attribute.
    pub stacks: Vec<Stack>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub axis: Axis,
    /// Bin edges (bins + 1 of them) for numeric axes, empty for categorical.
    pub edges: Vec<f64>,
    pub bars: Vec<Bar>,
    /// Occurrences whose axis value is missing.
    pub missing: usize,
}

/// Fixes the listing order of a set of category labels and, with `top_k`,
/// pools the less frequent ones into [`OTHER_LABEL`]. The missing label
/// is never pooled and always sorts last.
pub(crate) struct Categorizer {
    pooled: HashMap<String, ()>,
    rank: HashMap<String, usize>,
    pub(crate) labels: Vec<String>,
}

impl Categorizer {
    pub(crate) fn new<'a>(values: impl IntoIterator<Item = &'a str>, order: CategoryOrder, top_k: Option<usize>) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for v in values {
            *counts.entry(v).or_default() += 1;
        }
        let has_missing = counts.remove(MISSING_LABEL).is_some();
        let mut by_freq: Vec<(&str, usize)> = counts.iter().map(|(k, v)| (*k, *v)).collect();
        by_freq.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut pooled = HashMap::new();
        if let Some(k) = top_k {
            for (label, _) in by_freq.iter().skip(k) {
                pooled.insert(label.to_string(), ());
            }
        }
        let mut kept: Vec<&str> = by_freq.iter().map(|(l, _)| *l).filter(|l| !pooled.contains_key(*l)).collect();
        match order {
            CategoryOrder::Frequency => {}
            CategoryOrder::Lexical => kept.sort(),
            CategoryOrder::Weekday => kept.sort_by_key(|l| (weekday_index(l).unwrap_or(usize::MAX), l.to_string())),
        }
        let mut labels: Vec<String> = kept.into_iter().map(String::from).collect();
        if !pooled.is_empty() {
            labels.push(OTHER_LABEL.to_string());
        }
        if has_missing {
            labels.push(MISSING_LABEL.to_string());
        }
        let rank = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Categorizer { pooled, rank, labels }
    }

    pub(crate) fn map<'a>(&self, label: &'a str) -> &'a str {
        if self.pooled.contains_key(label) {
            OTHER_LABEL
        } else {
            label
        }
    }

    pub(crate) fn rank(&self, label: &str) -> usize {
        self.rank[self.map(label)]
    }
}

/// One histogram input: occurrence, axis key and optional stack label.
pub(crate) struct Item<'a, K> {
    pub id: OccurrenceId,
    pub key: Option<K>,
    pub stack: Option<&'a str>,
}

fn stacks_of(members: &[(OccurrenceId, Option<&str>)], stacks: Option<&Categorizer>) -> Vec<Stack> {
    let Some(cat) = stacks else { return Vec::new() };
    let mut groups: BTreeMap<usize, (String, Vec<OccurrenceId>)> = BTreeMap::new();
    for (id, s) in members {
        let label = cat.map(s.unwrap_or(MISSING_LABEL));
        groups.entry(cat.rank(label)).or_insert_with(|| (label.to_string(), Vec::new())).1.push(*id);
    }
    groups
        .into_values()
        .map(|(value, ids)| Stack { value, count: ids.len(), occurrence_ids: ids })
        .collect()
}

/// Equal-width bins over `[lo, hi]`; the last bin is closed.
pub(crate) fn numeric(
    axis: Axis,
    lo: f64,
    hi: f64,
    bins: usize,
    items: &[Item<'_, f64>],
    stacks: Option<&Categorizer>,
) -> Histogram {
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let width = hi - lo;
    let edges: Vec<f64> =
        (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 / bins as f64 }).collect();
    let mut members: Vec<Vec<(OccurrenceId, Option<&str>)>> = vec![Vec::new(); bins];
    let mut missing = 0;
    for it in items {
        match it.key {
            Some(x) => {
                let b = (((x - lo) / width) * bins as f64).floor();
                let b = if b < 0.0 { 0 } else { (b as usize).min(bins - 1) };
                members[b].push((it.id, it.stack));
            }
            None => missing += 1,
        }
    }
    let bars = members
        .into_iter()
        .enumerate()
        .map(|(i, m)| Bar {
            label: format!("[{}, {}{}", edges[i], edges[i + 1], if i + 1 == bins { "]" } else { ")" }),
            lower: Some(edges[i]),
            upper: Some(edges[i + 1]),
            total: m.len(),
            occurrence_ids: m.iter().map(|(id, _)| *id).collect(),
            stacks: stacks_of(&m, stacks),
        })
        .collect();
    Histogram { axis, edges, bars, missing }
}

/// One bar per category in the categorizer's order.
pub(crate) fn categorical(
    axis: Axis,
    cats: &Categorizer,
    items: &[Item<'_, &str>],
    stacks: Option<&Categorizer>,
) -> Histogram {
    let mut members: Vec<Vec<(OccurrenceId, Option<&str>)>> = vec![Vec::new(); cats.labels.len()];
    let mut missing = 0;
    for it in items {
        match it.key {
            Some(k) => members[cats.rank(k)].push((it.id, it.stack)),
            None => missing += 1,
        }
    }
    let bars = members
        .into_iter()
        .zip(&cats.labels)
        .filter(|(m, _)| !m.is_empty())
        .map(|(m, label)| Bar {
            label: label.clone(),
            lower: None,
            upper: None,
            total: m.len(),
            occurrence_ids: m.iter().map(|(id, _)| *id).collect(),
            stacks: stacks_of(&m, stacks),
        })
        .collect();
    Histogram { axis, edges: Vec::new(), bars, missing }
}
