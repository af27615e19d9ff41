use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AttributeKind, AttributeSchema, AttributeValue, Dataset, EventOccurrence, Level, OccurrenceId,
    Sequence,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeRule {
    Sum,
    Mean,
    First,
    Last,
    /// max - min
    Span,
    Mode,
    /// Distinct values in order of appearance, joined with `|`.
    Union,
}

impl MergeRule {
    fn allowed_for(self, kind: AttributeKind) -> bool {
        use MergeRule::*;
        match kind {
            AttributeKind::Numerical => matches!(self, Sum | Mean | First | Last | Span),
            AttributeKind::Categorical => matches!(self, First | Mode | Union),
            AttributeKind::Temporal => matches!(self, First | Last),
        }
    }

    fn apply(self, values: &[&AttributeValue]) -> AttributeValue {
        let present: Vec<&AttributeValue> = values.iter().copied().filter(|v| !v.is_missing()).collect();
        let Some(first) = present.first() else {
            return AttributeValue::Missing;
        };
        let nums = || present.iter().filter_map(|v| v.as_f64());
        match self {
            MergeRule::First => (*first).clone(),
            MergeRule::Last => (*present[present.len() - 1]).clone(),
            MergeRule::Sum => AttributeValue::Number(nums().sum()),
            MergeRule::Mean => AttributeValue::Number(nums().sum::<f64>() / present.len() as f64),
            MergeRule::Span => {
                let (lo, hi) = nums().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
                AttributeValue::Number(hi - lo)
            }
            MergeRule::Mode => {
                // Most frequent; ties go to the earliest value seen.
                let mut counts: Vec<(&str, usize)> = Vec::new();
                for v in present.iter().filter_map(|v| v.as_category()) {
                    match counts.iter_mut().find(|(c, _)| *c == v) {
                        Some((_, n)) => *n += 1,
                        None => counts.push((v, 1)),
                    }
                }
                let best = counts.iter().fold(None::<(&str, usize)>, |acc, &(c, n)| match acc {
                    Some((_, m)) if m >= n => acc,
                    _ => Some((c, n)),
                });
                best.map_or(AttributeValue::Missing, |(c, _)| AttributeValue::Category(c.to_string()))
            }
            MergeRule::Union => {
                let mut seen: Vec<&str> = Vec::new();
                for v in present.iter().filter_map(|v| v.as_category()) {
                    if !seen.contains(&v) {
                        seen.push(v);
                    }
                }
                AttributeValue::Category(seen.join("|"))
            }
        }
    }
}

/// Per-attribute merge rules for collapsed runs. Start always takes the
/// first value and end the last.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MergePolicy {
    pub rules: BTreeMap<String, MergeRule>,
}

impl MergePolicy {
    /// numerical -> mean, categorical -> mode, temporal -> first.
    pub fn defaults(schema: &AttributeSchema) -> Self {
        let rules = schema
            .at_level(Level::Event)
            .map(|d| {
                let rule = match d.kind {
                    AttributeKind::Numerical => MergeRule::Mean,
                    AttributeKind::Categorical => MergeRule::Mode,
                    AttributeKind::Temporal => MergeRule::First,
                };
                (d.name.clone(), rule)
            })
            .collect();
        MergePolicy { rules }
    }

    /// Defaults overridden by `overrides`.
    pub fn with_overrides(schema: &AttributeSchema, overrides: &BTreeMap<String, MergeRule>) -> Self {
        let mut p = MergePolicy::defaults(schema);
        p.rules.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
        p
    }

    pub fn validate(&self, schema: &AttributeSchema) -> Result<()> {
        for d in schema.at_level(Level::Event) {
            let rule = self
                .rules
                .get(&d.name)
                .ok_or_else(|| Error::Config(format!("merge policy has no rule for `{}`", d.name)))?;
            if !rule.allowed_for(d.kind) {
                return Err(Error::Config(format!(
                    "rule {rule:?} cannot merge {:?} attribute `{}`",
                    d.kind, d.name
                )));
            }
        }
        if let Some(extra) = self.rules.keys().find(|k| {
            schema.get(k).is_none_or(|d| d.level != Level::Event)
        }) {
            return Err(Error::Config(format!("merge rule for unknown event attribute `{extra}`")));
        }
        Ok(())
    }
}

fn collapse(run: Vec<EventOccurrence>, policy: &MergePolicy, next_id: &mut u64) -> EventOccurrence {
    if run.len() == 1 {
        return run.into_iter().next().expect("non-empty run");
    }
    let first = &run[0];
    let last = &run[run.len() - 1];
    let attrs = policy
        .rules
        .iter()
        .map(|(name, rule)| {
            let vals: Vec<&AttributeValue> =
                run.iter().map(|e| e.attrs.get(name).unwrap_or(&AttributeValue::Missing)).collect();
            (name.clone(), rule.apply(&vals))
        })
        .collect();
    let id = OccurrenceId(*next_id);
    *next_id += 1;
    EventOccurrence {
        id,
        sequence_id: first.sequence_id.clone(),
        event_type: first.event_type.clone(),
        start: first.start,
        end: last.end,
        attrs,
    }
}

/// Retypes every occurrence of `source_types` to `new_type`, then collapses
/// each maximal run of consecutive `new_type` occurrences into one.
///
/// Single-occurrence runs keep their id; merged runs get fresh ids.
pub fn substitute_aggregate(
    dataset: &Dataset,
    source_types: &BTreeSet<String>,
    new_type: &str,
    policy: &MergePolicy,
) -> Result<Dataset> {
    if source_types.is_empty() {
        return Err(Error::Config("no source event types given".into()));
    }
    if new_type.trim().is_empty() {
        return Err(Error::Config("new event type is blank".into()));
    }
    if !source_types.contains(new_type) && dataset.occurrences().any(|(_, e)| e.event_type == new_type) {
        return Err(Error::Config(format!("event type `{new_type}` already exists")));
    }
    policy.validate(dataset.schema())?;

    let mut next_id = dataset.max_occurrence_id().map_or(0, |m| m.0 + 1);
    let mut sequences = Vec::with_capacity(dataset.sequences().len());
    for seq in dataset.sequences() {
        let mut events = Vec::with_capacity(seq.events.len());
        let mut run: Vec<EventOccurrence> = Vec::new();
        for ev in &seq.events {
            if source_types.contains(&ev.event_type) {
                let mut e = ev.clone();
                e.event_type = new_type.to_string();
                run.push(e);
            } else {
                if !run.is_empty() {
                    events.push(collapse(std::mem::take(&mut run), policy, &mut next_id));
                }
                events.push(ev.clone());
            }
        }
        if !run.is_empty() {
            events.push(collapse(run, policy, &mut next_id));
        }
        sequences.push(Sequence { id: seq.id.clone(), events, attrs: seq.attrs.clone() });
    }
    let params = serde_json::json!({
        "source_types": source_types,
        "new_type": new_type,
        "policy": policy,
    });
    dataset.derive(sequences, "substitute_aggregate", params)
}
