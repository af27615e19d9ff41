use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::grouping::{ClusterAssignment, Resolver};
use crate::model::{AttrRef, AttributeValue, Dataset, Derived, SelectionSet, ValueType};

use super::histogram::{self, Axis, Categorizer, Item, MISSING_LABEL};
use super::quantile::{quantile_sorted, tukey_partition};
use super::{CategoryOrder, Container, EventBox, EventBoxConfig, Point, RoleScale, Scales, VerticalScale};

fn category_order(attr: &AttrRef) -> CategoryOrder {
    if attr.derived == Some(Derived::DayOfWeek) {
        CategoryOrder::Weekday
    } else {
        CategoryOrder::Frequency
    }
}

fn vertical_scale(attr: &AttrRef) -> Result<VerticalScale> {
    match attr.value_type {
        _ if attr.derived == Some(Derived::StartTimeOfDay) => Ok(VerticalScale::TimeOfDay),
        ValueType::Number => Ok(VerticalScale::Numeric),
        ValueType::Category => Ok(VerticalScale::Categorical { order: category_order(attr) }),
        ValueType::Timestamp => {
            Err(Error::Config(format!("p_v `{}` is a timestamp; use a numeric or categorical attribute", attr.name)))
        }
    }
}

fn role_scale(resolver: &Resolver<'_>, role: &str, attr: &AttrRef, event_type: &str) -> Result<RoleScale> {
    match attr.value_type {
        ValueType::Category => {
            Ok(RoleScale { attribute: attr.name.clone(), order: category_order(attr), edges: Vec::new() })
        }
        ValueType::Number => {
            let mut values: Vec<f64> = resolver
                .dataset
                .occurrences()
                .filter(|(_, e)| e.event_type == event_type)
                .filter_map(|(s, e)| resolver.value(s, e, attr).as_f64())
                .collect();
            values.sort_by(|a, b| a.total_cmp(b));
            let edges = if values.is_empty() {
                Vec::new()
            } else {
                [0.2, 0.4, 0.6, 0.8].iter().map(|q| quantile_sorted(&values, *q)).collect()
            };
            Ok(RoleScale { attribute: attr.name.clone(), order: CategoryOrder::Lexical, edges })
        }
        ValueType::Timestamp => Err(Error::Config(format!(
            "{role} `{}` is a timestamp; use a categorical or numeric attribute",
            attr.name
        ))),
    }
}

fn role_label(scale: &RoleScale, value: &AttributeValue) -> String {
    match value {
        AttributeValue::Category(s) => s.clone(),
        AttributeValue::Number(x) if !scale.edges.is_empty() => {
            format!("Q{}", 1 + scale.edges.iter().filter(|e| x > e).count())
        }
        _ => MISSING_LABEL.to_string(),
    }
}

/// Summarises the selected occurrences of `event_type`.
///
/// Occurrences whose horizontal value is missing are left out of the box and
/// counted in `excluded_missing_h`; missing vertical or secondary values only
/// drop out of the marks that use them.
pub fn build_eventbox(
    dataset: &Dataset,
    clusters: Option<&ClusterAssignment>,
    selection: &SelectionSet,
    event_type: &str,
    config: &EventBoxConfig,
) -> Result<EventBox> {
    config.validate()?;
    selection.check_version(dataset)?;
    let resolver = Resolver::new(dataset, clusters);

    let p_h = resolver.lookup(&config.p_h)?;
    if p_h.value_type != ValueType::Number {
        return Err(Error::Config(format!("p_h `{}` must be numeric", p_h.name)));
    }
    let p_v = resolver.lookup(&config.p_v)?;
    let v_scale = vertical_scale(&p_v)?;
    let role = |r: &str, name: &Option<String>| -> Result<Option<(AttrRef, RoleScale)>> {
        match name {
            None => Ok(None),
            Some(n) => {
                let attr = resolver.lookup(n)?;
                let scale = role_scale(&resolver, r, &attr, event_type)?;
                Ok(Some((attr, scale)))
            }
        }
    };
    let s_h = role("s_h", &config.s_h)?;
    let s_v = role("s_v", &config.s_v)?;
    let b = role("b", &config.b)?;

    let mut points = Vec::new();
    let mut excluded = 0;
    for id in selection.occurrence_ids.keys() {
        let Some((seq, ev)) = dataset.occurrence(*id) else { continue };
        if ev.event_type != event_type {
            continue;
        }
        let Some(x) = resolver.value(seq, ev, &p_h).as_f64() else {
            excluded += 1;
            continue;
        };
        let label = |r: &Option<(AttrRef, RoleScale)>| {
            r.as_ref().map(|(a, s)| role_label(s, &resolver.value(seq, ev, a)))
        };
        points.push(Point {
            occurrence_id: *id,
            sequence_id: seq.id.clone(),
            x,
            y: resolver.value(seq, ev, &p_v),
            s_h: label(&s_h),
            s_v: label(&s_v),
            color: label(&b),
        });
    }
    let scales = Scales { v: v_scale, s_h: s_h.map(|r| r.1), s_v: s_v.map(|r| r.1), b: b.map(|r| r.1) };
    assemble(event_type, selection.dataset_version, config, scales, None, excluded, points)
}

fn assemble(
    event_type: &str,
    dataset_version: u64,
    config: &EventBoxConfig,
    scales: Scales,
    breakdown_value: Option<String>,
    excluded_missing_h: usize,
    mut points: Vec<Point>,
) -> Result<EventBox> {
    if points.is_empty() {
        return Err(Error::EmptyInput(format!("no selected `{event_type}` occurrences with a value for `{}`", config.p_h)));
    }
    points.sort_by_key(|p| p.occurrence_id);
    let xs: Vec<_> = points.iter().map(|p| (p.occurrence_id, p.x)).collect();
    let part = tukey_partition(&xs, config.w)?;
    let summary = part.summary;

    let stack_cat = |scale: &Option<RoleScale>, pick: fn(&Point) -> Option<&str>| {
        scale.as_ref().map(|s| Categorizer::new(points.iter().filter_map(pick), s.order, config.top_k))
    };
    let h_stacks = stack_cat(&scales.s_h, |p| p.s_h.as_deref());
    let v_stacks = stack_cat(&scales.s_v, |p| p.s_v.as_deref());

    let h_items: Vec<Item<'_, f64>> =
        points.iter().map(|p| Item { id: p.occurrence_id, key: Some(p.x), stack: p.s_h.as_deref() }).collect();
    let hist_h =
        histogram::numeric(Axis::H, summary.min.min(0.0), summary.max, config.bins_h, &h_items, h_stacks.as_ref());

    let hist_v = match &scales.v {
        VerticalScale::Categorical { order } => {
            let items: Vec<Item<'_, &str>> = points
                .iter()
                .map(|p| Item { id: p.occurrence_id, key: p.y.as_category(), stack: p.s_v.as_deref() })
                .collect();
            let cats = Categorizer::new(items.iter().filter_map(|i| i.key), *order, config.top_k);
            histogram::categorical(Axis::V, &cats, &items, v_stacks.as_ref())
        }
        numeric => {
            let items: Vec<Item<'_, f64>> = points
                .iter()
                .map(|p| Item { id: p.occurrence_id, key: p.y.as_f64(), stack: p.s_v.as_deref() })
                .collect();
            let (lo, hi) = if *numeric == VerticalScale::TimeOfDay {
                (0.0, 1440.0)
            } else {
                items.iter().filter_map(|i| i.key).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
                    (lo.min(y), hi.max(y))
                })
            };
            let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
            histogram::numeric(Axis::V, lo, hi, config.bins_v, &items, v_stacks.as_ref())
        }
    };

    Ok(EventBox {
        event_type: event_type.to_string(),
        dataset_version,
        config: config.clone(),
        scales,
        breakdown_value,
        n: points.len(),
        occurrence_ids: points.iter().map(|p| p.occurrence_id).collect(),
        summary,
        fences: part.fences,
        outliers: part.outliers,
        container: Container { width: summary.max, height: Container::height_for(points.len()) },
        points,
        hist_h,
        hist_v,
        excluded_missing_h,
    })
}

/// One child box per value of the breakdown attribute, weekday order for
/// `day_of_week` and most frequent first otherwise; occurrences without a
/// value form a trailing `(missing)` child.
pub fn breakdown(parent: &EventBox) -> Result<Vec<EventBox>> {
    let Some(b) = &parent.scales.b else {
        return Err(Error::Config("breakdown needs the b attribute to be set".into()));
    };
    let mut groups: BTreeMap<&str, Vec<Point>> = BTreeMap::new();
    for p in &parent.points {
        groups.entry(p.color.as_deref().unwrap_or(MISSING_LABEL)).or_default().push(p.clone());
    }
    let cats = Categorizer::new(parent.points.iter().map(|p| p.color.as_deref().unwrap_or(MISSING_LABEL)), b.order, None);
    cats.labels
        .iter()
        .map(|label| {
            let pts = groups.remove(label.as_str()).unwrap_or_default();
            assemble(
                &parent.event_type,
                parent.dataset_version,
                &parent.config,
                parent.scales.clone(),
                Some(label.clone()),
                0,
                pts,
            )
        })
        .collect()
}

/// Union of disjoint boxes built with the same configuration, with every
/// statistic recomputed from the pooled points. If the boxes disagree on the
/// breakdown attribute the result has none.
pub fn merge(boxes: &[EventBox]) -> Result<EventBox> {
    let Some(first) = boxes.first() else {
        return Err(Error::EmptyInput("nothing to merge".into()));
    };
    let strip = |bx: &EventBox| {
        let mut c = bx.config.clone();
        c.b = None;
        let mut s = bx.scales.clone();
        s.b = None;
        (c, s)
    };
    let base = strip(first);
    let mut same_b = true;
    for bx in &boxes[1..] {
        if bx.event_type != first.event_type {
            return Err(Error::Config(format!(
                "cannot merge `{}` with `{}` boxes",
                first.event_type, bx.event_type
            )));
        }
        if bx.dataset_version != first.dataset_version {
            return Err(Error::Config("boxes come from different dataset versions".into()));
        }
        if strip(bx) != base {
            return Err(Error::Config("boxes were built with different configurations".into()));
        }
        same_b &= bx.config.b == first.config.b && bx.scales.b == first.scales.b;
    }
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    for bx in boxes {
        for p in &bx.points {
            if !seen.insert(p.occurrence_id) {
                return Err(Error::Config(format!("occurrence {} appears in more than one box", p.occurrence_id)));
            }
            let mut p = p.clone();
            if !same_b {
                p.color = None;
            }
            points.push(p);
        }
    }
    let (config, scales) = if same_b { (first.config.clone(), first.scales.clone()) } else { base };
    let breakdown_value = if boxes.iter().all(|b| b.breakdown_value == first.breakdown_value) {
        first.breakdown_value.clone()
    } else {
        None
    };
    let excluded = boxes.iter().map(|b| b.excluded_missing_h).sum();
    assemble(&first.event_type, first.dataset_version, &config, scales, breakdown_value, excluded, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventbox::{density_grid, OTHER_LABEL};
    use crate::model::{
        AttributeDef, AttributeKind, AttributeSchema, EventOccurrence, Level, OccurrenceId, Sequence, SequenceId,
        TimeZoneSpec,
    };

    const MON_0900: i64 = 1_704_099_600;
    const DAY: i64 = 86_400;

    /// One `x` event per sequence: (start, duration seconds, ward).
    fn data(rows: &[(i64, i64, Option<&str>)]) -> Dataset {
        let schema =
            AttributeSchema::new(vec![AttributeDef::new("ward", AttributeKind::Categorical, Level::Event)]).unwrap();
        let seqs = rows
            .iter()
            .enumerate()
            .map(|(i, (start, dur, ward))| {
                let sid = SequenceId(format!("S{i}"));
                let mut attrs = BTreeMap::new();
                if let Some(w) = ward {
                    attrs.insert("ward".to_string(), AttributeValue::Category(w.to_string()));
                }
                let ev = EventOccurrence {
                    id: OccurrenceId(i as u64),
                    sequence_id: sid.clone(),
                    event_type: "x".into(),
                    start: *start,
                    end: start + dur,
                    attrs,
                };
                Sequence { id: sid, events: vec![ev], attrs: BTreeMap::new() }
            })
            .collect();
        Dataset::new(0, schema, TimeZoneSpec::UTC, seqs, vec![]).unwrap()
    }

    fn build(d: &Dataset, config: &EventBoxConfig) -> Result<EventBox> {
        build_eventbox(d, None, &SelectionSet::all(d), "x", config)
    }

    #[test]
    fn durations_with_one_outlier() {
        let d = data(&[(MON_0900, 1, None), (MON_0900, 2, None), (MON_0900, 3, None), (MON_0900, 4, None), (MON_0900, 100, None)]);
        let bx = build(&d, &EventBoxConfig::default()).unwrap();
        assert_eq!(bx.n, 5);
        assert_eq!(bx.container.width, 100.0);
        assert_eq!(bx.container.height, 5.0);
        assert_eq!(bx.outliers, vec![OccurrenceId(4)]);
        assert_eq!((bx.fences.lower, bx.fences.upper), (-1.0, 7.0));
        assert_eq!(bx.hist_h.bars.iter().map(|b| b.total).sum::<usize>(), 5);
        assert!(bx.hist_h.bars.iter().all(|b| b.stacks.is_empty()));
    }

    #[test]
    fn hourly_time_of_day_bins() {
        let d = data(&[(MON_0900 + 600, 5, None), (MON_0900 + 3000, 5, None)]);
        let bx = build(&d, &EventBoxConfig::default()).unwrap();
        assert_eq!(bx.hist_v.bars.len(), 24);
        assert_eq!(bx.hist_v.bars[9].total, 2);
        assert_eq!(bx.hist_v.bars[9].lower, Some(540.0));
    }

    #[test]
    fn top_k_pools_stacks() {
        let rows: Vec<(i64, i64, Option<&str>)> = (0..30)
            .map(|i| (MON_0900, 10 + i, Some(["a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"][i as usize % 12])))
            .collect();
        let d = data(&rows);
        let config = EventBoxConfig { s_v: Some("ward".into()), top_k: Some(10), ..Default::default() };
        let bx = build(&d, &config).unwrap();
        for bar in &bx.hist_v.bars {
            assert!(bar.stacks.len() <= 11);
            assert_eq!(bar.stacks.iter().map(|s| s.count).sum::<usize>(), bar.total);
        }
        assert!(bx.hist_v.bars[9].stacks.iter().any(|s| s.value == OTHER_LABEL));
    }

    #[test]
    fn breakdown_by_weekday_and_merge_back() {
        let rows: Vec<(i64, i64, Option<&str>)> =
            (0..20).map(|i| (MON_0900 + (i % 4) * DAY, 10 + i * 3, if i % 5 == 0 { None } else { Some("w") })).collect();
        let d = data(&rows);
        let config = EventBoxConfig { b: Some("day_of_week".into()), s_h: Some("ward".into()), ..Default::default() };
        let bx = build(&d, &config).unwrap();
        let kids = breakdown(&bx).unwrap();
        let labels: Vec<_> = kids.iter().map(|k| k.breakdown_value.clone().unwrap()).collect();
        assert_eq!(labels, ["Mon", "Tue", "Wed", "Thu"]);
        assert_eq!(kids.iter().map(|k| k.n).sum::<usize>(), bx.n);
        assert_eq!(merge(&kids).unwrap(), bx);
        assert_eq!(merge(std::slice::from_ref(&bx)).unwrap(), bx);
        assert!(matches!(merge(&[kids[0].clone(), kids[0].clone()]), Err(Error::Config(_))));
        let no_b = build(&d, &EventBoxConfig::default()).unwrap();
        assert!(matches!(breakdown(&no_b), Err(Error::Config(_))));
    }

    #[test]
    fn missing_breakdown_value_is_last_child() {
        let d = data(&[(MON_0900, 1, Some("b")), (MON_0900, 2, None), (MON_0900, 3, Some("a")), (MON_0900, 4, Some("a"))]);
        let config = EventBoxConfig { b: Some("ward".into()), ..Default::default() };
        let kids = breakdown(&build(&d, &config).unwrap()).unwrap();
        let labels: Vec<_> = kids.iter().map(|k| k.breakdown_value.clone().unwrap()).collect();
        assert_eq!(labels, ["a", "b", MISSING_LABEL]);
    }

    #[test]
    fn config_errors() {
        let d = data(&[(MON_0900, 1, Some("a"))]);
        let bad_ph = EventBoxConfig { p_h: "ward".into(), ..Default::default() };
        assert!(matches!(build(&d, &bad_ph), Err(Error::Config(_))));
        let dup = EventBoxConfig { s_h: Some("ward".into()), b: Some("ward".into()), ..Default::default() };
        assert!(matches!(build(&d, &dup), Err(Error::Config(_))));
        let cluster = EventBoxConfig { b: Some("cluster".into()), ..Default::default() };
        assert!(matches!(build(&d, &cluster), Err(Error::State(_))));
        let unknown = EventBoxConfig { s_v: Some("nope".into()), ..Default::default() };
        assert!(matches!(build(&d, &unknown), Err(Error::Name(_))));
        let none = build_eventbox(&d, None, &SelectionSet::all(&d), "y", &EventBoxConfig::default());
        assert!(matches!(none, Err(Error::EmptyInput(_))));
    }

    #[test]
    fn density_examples() {
        let same = data(&[(MON_0900, 5, None), (MON_0900, 5, None), (MON_0900, 5, None)]);
        let g = density_grid(&build(&same, &EventBoxConfig::default()).unwrap(), 4, 4).unwrap();
        assert_eq!(g.counts.iter().flatten().sum::<usize>(), 3);
        assert_eq!(g.intensity.iter().flatten().filter(|v| **v == 1.0).count(), 1);
        assert_eq!(g.intensity.iter().flatten().filter(|v| **v == 0.0).count(), 15);

        let two = data(&[(MON_0900, 1, None), (MON_0900 + 7200, 100, None)]);
        let g = density_grid(&build(&two, &EventBoxConfig::default()).unwrap(), 3, 3).unwrap();
        assert_eq!(g.intensity.iter().flatten().filter(|v| **v == 1.0).count(), 2);

        let cat = EventBoxConfig { p_v: "ward".into(), ..Default::default() };
        let d = data(&[(MON_0900, 1, Some("a")), (MON_0900, 2, None), (MON_0900, 3, Some("b"))]);
        let g = density_grid(&build(&d, &cat).unwrap(), 2, 2).unwrap();
        assert_eq!(g.missing, 1);
        assert_eq!(g.counts.iter().flatten().sum::<usize>(), 2);
    }

    #[test]
    fn numeric_roles_bin_into_quintiles() {
        let rows: Vec<(i64, i64, Option<&str>)> = (0..50).map(|i| (MON_0900, i, None)).collect();
        let d = data(&rows);
        let config = EventBoxConfig { s_h: Some("duration".into()), p_h: "start_time_of_day".into(), p_v: "day_of_week".into(), ..Default::default() };
        let bx = build(&d, &config).unwrap();
        let labels: Vec<_> = bx.hist_h.bars.iter().flat_map(|b| b.stacks.iter().map(|s| s.value.clone())).collect();
        assert_eq!(labels, ["Q1", "Q2", "Q3", "Q4", "Q5"]);
        assert_eq!(bx.hist_v.bars[0].label, "Mon");
    }
}
