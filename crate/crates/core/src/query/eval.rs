use crate::error::{Error, Result};
use crate::grouping::{ClusterAssignment, Resolver};
use crate::model::{AttrRef, AttributeValue, Dataset, Level, SelectionSet, Sequence};

use super::parser::check_types;
use super::{CmpOp, Literal, QueryAst};

/// Query with attribute names resolved once.
enum Compiled<'q> {
    Cmp { attr: AttrRef, op: CmpOp, literal: &'q Literal },
    Cluster(&'q str),
    Has(&'q str),
    And(Box<Compiled<'q>>, Box<Compiled<'q>>),
    Or(Box<Compiled<'q>>, Box<Compiled<'q>>),
    Not(Box<Compiled<'q>>),
}

fn compile<'q>(ast: &'q QueryAst, r: &Resolver<'_>) -> Result<Compiled<'q>> {
    Ok(match ast {
        QueryAst::Comparison { attribute, op, literal } => Compiled::Cmp { attr: r.lookup(attribute)?, op: *op, literal },
        QueryAst::ClusterIs { label } => Compiled::Cluster(label),
        QueryAst::EventContains { event_type } => Compiled::Has(event_type),
        QueryAst::And { left, right } => Compiled::And(Box::new(compile(left, r)?), Box::new(compile(right, r)?)),
        QueryAst::Or { left, right } => Compiled::Or(Box::new(compile(left, r)?), Box::new(compile(right, r)?)),
        QueryAst::Not { expr } => Compiled::Not(Box::new(compile(expr, r)?)),
    })
}

/// Missing values never satisfy a comparison, whatever the operator.
fn compare(value: &AttributeValue, op: CmpOp, literal: &Literal) -> bool {
    match (value, literal) {
        (AttributeValue::Number(x), Literal::Number(y)) => op.test(*x, *y),
        (AttributeValue::Timestamp(t), Literal::Number(y)) => op.test(*t as f64, *y),
        (AttributeValue::Category(s), Literal::String(y)) => op.test(s.as_str(), y.as_str()),
        _ => false,
    }
}

fn matches(q: &Compiled<'_>, seq: &Sequence, r: &Resolver<'_>) -> bool {
    match q {
        Compiled::Cmp { attr, op, literal } => match attr.level {
            Level::Sequence => compare(&r.sequence_value(seq, attr), *op, literal),
            Level::Event => seq.events.iter().any(|e| compare(&r.value(seq, e, attr), *op, literal)),
        },
        Compiled::Cluster(label) => r.clusters.and_then(|c| c.label(&seq.id)) == Some(*label),
        Compiled::Has(t) => seq.events.iter().any(|e| e.event_type == *t),
        Compiled::And(a, b) => matches(a, seq, r) && matches(b, seq, r),
        Compiled::Or(a, b) => matches(a, seq, r) || matches(b, seq, r),
        Compiled::Not(a) => !matches(a, seq, r),
    }
}

/// Sequences satisfying the query, with all their occurrences. Event-level
/// comparisons hold when any event of the sequence satisfies them.
pub fn evaluate_query(ast: &QueryAst, dataset: &Dataset, clusters: Option<&ClusterAssignment>) -> Result<SelectionSet> {
    check_types(ast, dataset.schema())?;
    if ast.uses_clusters() && clusters.is_none() {
        return Err(Error::State("the query refers to clusters but none have been computed".into()));
    }
    let r = Resolver::new(dataset, clusters);
    let compiled = compile(ast, &r)?;
    let mut sel = SelectionSet::empty(dataset.version(), format!("query: {ast}"));
    for seq in dataset.sequences() {
        if matches(&compiled, seq, &r) {
            sel.add_sequence(dataset, &seq.id);
        }
    }
    Ok(sel)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::model::{
        AttributeDef, AttributeKind, AttributeSchema, EventOccurrence, OccurrenceId, SequenceId, TimeZoneSpec,
    };
    use crate::query::parse_query;

    fn fixture() -> Dataset {
        let schema =
            AttributeSchema::new(vec![AttributeDef::new("age", AttributeKind::Numerical, Level::Sequence)]).unwrap();
        let ages = [AttributeValue::Number(40.0), AttributeValue::Number(54.0), AttributeValue::Missing];
        let seqs = ages
            .into_iter()
            .enumerate()
            .map(|(i, age)| {
                let id = SequenceId(format!("P{i}"));
                let ev = EventOccurrence {
                    id: OccurrenceId(i as u64),
                    sequence_id: id.clone(),
                    event_type: if i == 0 { "a".into() } else { "b".into() },
                    start: 0,
                    end: 10,
                    attrs: BTreeMap::new(),
                };
                Sequence { id, events: vec![ev], attrs: BTreeMap::from([("age".to_string(), age)]) }
            })
            .collect();
        Dataset::new(0, schema, TimeZoneSpec::UTC, seqs, vec![]).unwrap()
    }

    fn ids(s: &SelectionSet) -> Vec<&str> {
        s.sequence_ids.iter().map(|i| i.as_str()).collect()
    }

    #[test]
    fn missing_never_matches() {
        let d = fixture();
        let run = |q: &str| evaluate_query(&parse_query(q, d.schema()).unwrap(), &d, None).unwrap();
        assert_eq!(ids(&run("age > 50")), ["P1"]);
        assert_eq!(ids(&run("age != 54")), ["P0"]);
        assert_eq!(ids(&run("NOT age > 50")), ["P0", "P2"]);
        assert_eq!(ids(&run("HAS b")), ["P1", "P2"]);
        assert_eq!(ids(&run("duration >= 10 AND event_type = 'a'")), ["P0"]);
        assert_eq!(run("age > 50").occurrence_ids.len(), 1);
    }

    #[test]
    fn clusters() {
        let d = fixture();
        let q = parse_query("(Cluster ID = C1) AND (age > 50)", d.schema()).unwrap();
        assert!(matches!(evaluate_query(&q, &d, None), Err(Error::State(_))));
        let labels = BTreeMap::from([
            (SequenceId::from("P0"), "C1".to_string()),
            (SequenceId::from("P1"), "C1".to_string()),
            (SequenceId::from("P2"), "C2".to_string()),
        ]);
        let c = ClusterAssignment { k: 2, labels, method: "test".into() };
        assert_eq!(ids(&evaluate_query(&q, &d, Some(&c)).unwrap()), ["P1"]);
        let q = parse_query("Cluster ID = C1", d.schema()).unwrap();
        assert_eq!(ids(&evaluate_query(&q, &d, Some(&c)).unwrap()), ["P0", "P1"]);
        let q = parse_query("cluster = 'C2'", d.schema()).unwrap();
        assert_eq!(ids(&evaluate_query(&q, &d, Some(&c)).unwrap()), ["P2"]);
    }
}
