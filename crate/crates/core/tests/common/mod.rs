//! Shared fixtures and independent reference implementations for the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use evbox_core::grouping::ClusterAssignment;
use evbox_core::model::{
    AttributeDef, AttributeKind, AttributeSchema, AttributeValue, Dataset, EventOccurrence, Level, OccurrenceId,
    Sequence, SequenceId, TimeZoneSpec,
};
use evbox_core::query::{CmpOp, Literal, QueryAst};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ALPHABET: [&str; 5] = ["a", "b", "c", "d", "e"];
pub const URGENCY: [&str; 3] = ["Low", "Medium", "High"];
pub const STAFF: [&str; 3] = ["N1", "N2", "D1"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn schema() -> AttributeSchema {
    AttributeSchema::new(vec![
        AttributeDef::new("age", AttributeKind::Numerical, Level::Sequence),
        AttributeDef::new("urgency", AttributeKind::Categorical, Level::Sequence),
        AttributeDef::new("staff", AttributeKind::Categorical, Level::Event),
        AttributeDef::new("score", AttributeKind::Numerical, Level::Event),
    ])
    .unwrap()
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_sequences: usize,
    pub max_len: usize,
    pub alphabet: usize,
    /// Probability that an attribute cell is missing.
    pub missing: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_sequences: 30, max_len: 8, alphabet: 5, missing: 0.1 }
    }
}

/// Random dataset over the test schema. Sequences have 1..=max_len events
/// with non-decreasing starts; some events overlap.
pub fn random_dataset(seed: u64, shape: Shape) -> Dataset {
    let mut r = rng(seed);
    let n = r.random_range(1..=shape.max_sequences);
    let mut next = 0u64;
    let mut seqs = Vec::with_capacity(n);
    for s in 0..n {
        let id = SequenceId(format!("s{s}"));
        let mut attrs = BTreeMap::new();
        if r.random::<f64>() >= shape.missing {
            attrs.insert("age".to_string(), AttributeValue::Number(r.random_range(18..90) as f64));
        }
        if r.random::<f64>() >= shape.missing {
            attrs.insert("urgency".to_string(), AttributeValue::Category(URGENCY[r.random_range(0..3)].into()));
        }
        // 2024-01-01 (a Monday) plus up to four weeks.
        let mut t: i64 = 1_704_067_200 + r.random_range(0..28 * 86_400);
        let len = r.random_range(1..=shape.max_len);
        let mut events = Vec::with_capacity(len);
        for _ in 0..len {
            let dur = r.random_range(0..3_600);
            let mut eattrs = BTreeMap::new();
            if r.random::<f64>() >= shape.missing {
                eattrs.insert("staff".to_string(), AttributeValue::Category(STAFF[r.random_range(0..3)].into()));
            }
            if r.random::<f64>() >= shape.missing {
                eattrs.insert("score".to_string(), AttributeValue::Number(r.random_range(-50..50) as f64 / 4.0));
            }
            events.push(EventOccurrence {
                id: OccurrenceId(next),
                sequence_id: id.clone(),
                event_type: ALPHABET[r.random_range(0..shape.alphabet)].to_string(),
                start: t,
                end: t + dur,
                attrs: eattrs,
            });
            next += 1;
            // Mostly back to back, sometimes a gap, sometimes an overlap.
            t += match r.random_range(0..10) {
                0 => dur / 2,
                1 => dur + r.random_range(0..7_200),
                _ => dur,
            };
        }
        seqs.push(Sequence { id, events, attrs });
    }
    Dataset::new(0, schema(), TimeZoneSpec::UTC, seqs, vec![]).unwrap()
}

/// Random cluster labels C1..Ck for every sequence.
pub fn random_clusters(dataset: &Dataset, k: usize, seed: u64) -> ClusterAssignment {
    let mut r = rng(seed);
    let labels = dataset
        .sequences()
        .iter()
        .map(|s| (s.id.clone(), format!("C{}", r.random_range(1..=k))))
        .collect();
    ClusterAssignment { k, labels, method: "random".into() }
}

// ---------------------------------------------------------------------------
// Quantiles

/// Sorts by repeated insertion and interpolates between order statistics
/// at position q(n-1).
pub fn quantile_oracle(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = Vec::with_capacity(values.len());
    for &x in values {
        let at = v.iter().position(|y| *y > x).unwrap_or(v.len());
        v.insert(at, x);
    }
    let p = q * (v.len() - 1) as f64;
    let lo = p.floor() as usize;
    let frac = p - lo as f64;
    if lo + 1 < v.len() {
        v[lo] + frac * (v[lo + 1] - v[lo])
    } else {
        v[lo]
    }
}

// ---------------------------------------------------------------------------
// Distribution tails by numerical integration

/// Gamma at a positive multiple of 1/2, from Gamma(1) = 1 and
/// Gamma(1/2) = sqrt(pi) by the recurrence.
pub fn gamma_half(twice: u32) -> f64 {
    assert!(twice > 0);
    let (mut g, mut x) = if twice % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while x < twice as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, 1e-13, 50)
}

/// Two-sided p of Student's t with integer `df`.
pub fn t_two_sided_oracle(t: f64, df: u32) -> f64 {
    let nu = df as f64;
    let c = gamma_half(df + 1) / ((nu * std::f64::consts::PI).sqrt() * gamma_half(df));
    let density = |x: f64| c * (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    1.0 - 2.0 * integrate(&density, 0.0, t.abs())
}

/// Upper tail of chi-square with integer `df`. Integrates over u = sqrt(x)
/// so the df = 1 singularity at zero disappears.
pub fn chisq_upper_oracle(x: f64, df: u32) -> f64 {
    let k = df as f64;
    let c = 1.0 / (2f64.powf(k / 2.0) * gamma_half(df));
    let density_u = |u: f64| 2.0 * c * u.powf(k - 1.0) * (-u * u / 2.0).exp();
    1.0 - integrate(&density_u, 0.0, x.sqrt())
}

/// Upper tail of F with integer dfs, again over u = sqrt(x).
pub fn f_upper_oracle(x: f64, d1: u32, d2: u32) -> f64 {
    let (a, b) = (d1 as f64, d2 as f64);
    let beta = gamma_half(d1) * gamma_half(d2) / gamma_half(d1 + d2);
    let c = (a / b).powf(a / 2.0) / beta;
    let density_u = |u: f64| {
        let x = u * u;
        2.0 * c * u.powf(a - 1.0) * (1.0 + a * x / b).powf(-(a + b) / 2.0)
    };
    1.0 - integrate(&density_u, 0.0, x.sqrt())
}

// ---------------------------------------------------------------------------
// Queries

pub fn numeric_literal() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-100i32..100).prop_map(f64::from),
        (-4000i32..4000).prop_map(|x| x as f64 / 8.0),
        Just(0.1),
        Just(1e-7),
        Just(-2.5e12),
    ]
}

fn any_name() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z_][a-z0-9_]{0,6}",
        Just("AND".to_string()),
        Just("has".to_string()),
        Just("wait time".to_string()),
        Just("quote\"d".to_string()),
        Just("cluster".to_string()),
        Just("9lives".to_string()),
    ]
}

fn any_text() -> impl Strategy<Value = String> {
    prop_oneof![
        "[A-Za-z0-9 ]{0,8}",
        Just("O'Brien".to_string()),
        Just("back\\slash".to_string()),
        Just("Or".to_string()),
        Just(String::new()),
    ]
}

fn any_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge),
    ]
}

/// Syntactically arbitrary ASTs: any names, any literals.
pub fn any_ast() -> impl Strategy<Value = QueryAst> {
    let leaf = prop_oneof![
        (any_name(), any_op(), numeric_literal())
            .prop_map(|(a, op, x)| QueryAst::cmp(&a, op, Literal::Number(x))),
        (any_name(), any_op(), any_text()).prop_map(|(a, op, s)| QueryAst::cmp(&a, op, Literal::String(s))),
        any_text().prop_map(|label| QueryAst::ClusterIs { label }),
        any_text().prop_map(|event_type| QueryAst::EventContains { event_type }),
    ];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| QueryAst::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| QueryAst::or(a, b)),
            inner.prop_map(QueryAst::not),
        ]
    })
}

/// ASTs that type-check against [`schema`] and whose literals hit the
/// values [`random_dataset`] produces.
pub fn typed_ast() -> impl Strategy<Value = QueryAst> {
    let eq_ops = prop_oneof![Just(CmpOp::Eq), Just(CmpOp::Ne)];
    let leaf = prop_oneof![
        (prop_oneof![Just("age"), Just("score"), Just("duration"), Just("start_time_of_day")], any_op(), -60i32..100)
            .prop_map(|(a, op, x)| {
                let scale = match a {
                    "duration" => 40.0,
                    "start_time_of_day" => 15.0,
                    "score" => 0.25,
                    _ => 1.0,
                };
                QueryAst::cmp(a, op, Literal::Number(x as f64 * scale))
            }),
        (eq_ops.clone(), 0usize..3).prop_map(|(op, i)| QueryAst::cmp("urgency", op, Literal::String(URGENCY[i].into()))),
        (eq_ops.clone(), 0usize..3).prop_map(|(op, i)| QueryAst::cmp("staff", op, Literal::String(STAFF[i].into()))),
        (eq_ops, 0usize..7).prop_map(|(op, i)| {
            QueryAst::cmp("day_of_week", op, Literal::String(evbox_core::model::WEEKDAYS[i].into()))
        }),
        (0usize..5).prop_map(|i| QueryAst::EventContains { event_type: ALPHABET[i].into() }),
        (1usize..5).prop_map(|i| QueryAst::ClusterIs { label: format!("C{i}") }),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| QueryAst::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| QueryAst::or(a, b)),
            inner.prop_map(QueryAst::not),
        ]
    })
}

fn cmp_oracle(v: &AttributeValue, op: CmpOp, lit: &Literal) -> bool {
    let ord = match (v, lit) {
        (AttributeValue::Number(x), Literal::Number(y)) => x.partial_cmp(y),
        (AttributeValue::Category(x), Literal::String(y)) => Some(x.as_str().cmp(y.as_str())),
        _ => None,
    };
    let Some(o) = ord else { return false };
    use std::cmp::Ordering::*;
    match op {
        CmpOp::Eq => o == Equal,
        CmpOp::Ne => o != Equal,
        CmpOp::Lt => o == Less,
        CmpOp::Le => o != Greater,
        CmpOp::Gt => o == Greater,
        CmpOp::Ge => o != Less,
    }
}

/// Straight per-sequence interpretation of the query semantics.
pub fn brute_force_matches(ast: &QueryAst, d: &Dataset, c: &ClusterAssignment, seq: &Sequence) -> bool {
    match ast {
        QueryAst::Comparison { attribute, op, literal } => {
            let a = d.schema().lookup(attribute).unwrap();
            if a.level == Level::Sequence {
                let v = seq.attrs.get(attribute).cloned().unwrap_or_default();
                cmp_oracle(&v, *op, literal)
            } else {
                seq.events.iter().any(|e| {
                    let v = evbox_core::model::resolve_attribute(d, e.id, attribute).unwrap();
                    cmp_oracle(&v, *op, literal)
                })
            }
        }
        QueryAst::ClusterIs { label } => c.labels.get(&seq.id) == Some(label),
        QueryAst::EventContains { event_type } => seq.events.iter().any(|e| &e.event_type == event_type),
        QueryAst::And { left, right } => brute_force_matches(left, d, c, seq) && brute_force_matches(right, d, c, seq),
        QueryAst::Or { left, right } => brute_force_matches(left, d, c, seq) || brute_force_matches(right, d, c, seq),
        QueryAst::Not { expr } => !brute_force_matches(expr, d, c, seq),
    }
}

pub fn brute_force_select(ast: &QueryAst, d: &Dataset, c: &ClusterAssignment) -> (BTreeSet<SequenceId>, BTreeSet<OccurrenceId>) {
    let mut seqs = BTreeSet::new();
    let mut occs = BTreeSet::new();
    for s in d.sequences() {
        if brute_force_matches(ast, d, c, s) {
            seqs.insert(s.id.clone());
            occs.extend(s.events.iter().map(|e| e.id));
        }
    }
    (seqs, occs)
}

/// Relative error with an absolute floor for values near zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300).max(a.abs()).max(1.0e-12)
}
