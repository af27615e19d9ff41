use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ValueType;

use super::special::t_two_sided_p;
use super::{level_order, mean_sd, Scope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single observation.
    pub sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    /// Positive when the first group has the larger mean.
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub a: String,
    pub b: String,
    pub t: f64,
    pub df: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanTestTable {
    pub response: String,
    pub grouping: String,
    pub n: usize,
    pub groups: Vec<GroupStats>,
    pub tests: Vec<PairTest>,
    pub notes: Vec<String>,
}

/// Welch's unequal-variance t test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("each group needs at least two observations".into()));
    }
    let (ma, sa) = mean_sd(a);
    let (mb, sb) = mean_sd(b);
    let (va, vb) = (sa * sa / a.len() as f64, sb * sb / b.len() as f64);
    let se2 = va + vb;
    if se2 == 0.0 {
        if ma == mb {
            return Ok(WelchTest { t: 0.0, df: (a.len() + b.len() - 2) as f64, p: 1.0 });
        }
        return Err(Error::Numeric("both groups are constant with different means".into()));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    Ok(WelchTest { t, df, p: t_two_sided_p(t, df)? })
}

/// Summary per level of `grouping` and a Welch test for every pair of
/// levels with at least two observations.
pub fn mean_comparison(scope: &Scope<'_>, response: &str, grouping: &str) -> Result<MeanTestTable> {
    let r = scope.resolver();
    let resp = r.lookup(response)?;
    let group = r.lookup(grouping)?;
    if resp.value_type != ValueType::Number {
        return Err(Error::Type(format!("`{response}` is not numeric")));
    }
    if group.value_type != ValueType::Category {
        return Err(Error::Type(format!("`{grouping}` is not categorical")));
    }
    let mut by_level: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut skipped = 0;
    for row in scope.observations(&[resp.clone(), group.clone()]) {
        match (row[0].as_f64(), row[1].as_category()) {
            (Some(y), Some(g)) => by_level.entry(g.to_string()).or_default().push(y),
            _ => skipped += 1,
        }
    }
    let order = level_order(&group, by_level.keys().map(String::as_str));
    let groups: Vec<GroupStats> = order
        .iter()
        .map(|l| {
            let v = &by_level[l];
            let (mean, sd) = mean_sd(v);
            GroupStats { label: l.clone(), n: v.len(), mean, sd }
        })
        .collect();
    let testable: Vec<&GroupStats> = groups.iter().filter(|g| g.n >= 2).collect();
    if testable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "`{response}` by `{grouping}` needs two levels with at least two observations"
        )));
    }
    let mut notes = Vec::new();
    if skipped > 0 {
        notes.push(format!("{skipped} observations with missing values excluded"));
    }
    for g in groups.iter().filter(|g| g.n < 2) {
        notes.push(format!("level `{}` has n = {} and is not tested", g.label, g.n));
    }
    let mut tests = Vec::new();
    for (i, a) in testable.iter().enumerate() {
        for b in &testable[i + 1..] {
            match welch_t_test(&by_level[&a.label], &by_level[&b.label]) {
                Ok(w) => tests.push(PairTest { a: a.label.clone(), b: b.label.clone(), t: w.t, df: w.df, p: w.p }),
                Err(e) => notes.push(format!("{} vs {}: {e}", a.label, b.label)),
            }
        }
    }
    Ok(MeanTestTable {
        response: response.to_string(),
        grouping: grouping.to_string(),
        n: groups.iter().map(|g| g.n).sum(),
        groups,
        tests,
        notes,
    })
}
