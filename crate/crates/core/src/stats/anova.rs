use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ValueType;

use super::qr::qr_least_squares;
use super::special::{f_upper_p, t_two_sided_p};
use super::{level_order, Scope};

/// A categorical predictor: `codes[i]` indexes `levels` for observation `i`.
/// The first level is the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub name: String,
    pub levels: Vec<String>,
    pub codes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaTerm {
    pub term: String,
    pub df: usize,
    /// Sequential (type I) sum of squares.
    pub ss: f64,
    pub ms: f64,
    pub f: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub df: usize,
    pub ss: f64,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub t: Option<f64>,
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaReport {
    pub response: String,
    pub factors: Vec<String>,
    pub max_order: usize,
    pub n: usize,
    /// Terms in model order: main effects first, highest-order interactions last.
    pub terms: Vec<AnovaTerm>,
    pub residual: ResidualRow,
    pub total_ss: f64,
    pub coefficients: Vec<Coefficient>,
    /// Design columns removed because they duplicate earlier ones.
    pub dropped_columns: Vec<String>,
    pub notes: Vec<String>,
}

impl AnovaReport {
    pub fn term(&self, name: &str) -> Option<&AnovaTerm> {
        self.terms.iter().find(|t| t.term == name)
    }
}

/// Factor index sets of every term up to `max_order`, by order and then
/// lexicographically.
fn term_sets(k: usize, max_order: usize) -> Vec<Vec<usize>> {
    fn combos(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            combos(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for size in 1..=max_order {
        combos(0, k, size, &mut Vec::new(), &mut out);
    }
    out
}

/// Least-squares ANOVA with dummy coding against each factor's first level
/// and all interactions up to `max_order`.
pub fn fit_anova(response: &str, y: &[f64], factors: &[Factor], max_order: usize) -> Result<AnovaReport> {
    let n = y.len();
    if factors.is_empty() {
        return Err(Error::Config("ANOVA needs at least one factor".into()));
    }
    if max_order == 0 || max_order > factors.len() {
        return Err(Error::Config(format!("max_order must lie in 1..={}, got {max_order}", factors.len())));
    }
    for (i, f) in factors.iter().enumerate() {
        if f.codes.len() != n {
            return Err(Error::Config(format!("factor `{}` has {} codes for {n} observations", f.name, f.codes.len())));
        }
        if f.codes.iter().any(|c| *c >= f.levels.len()) {
            return Err(Error::Config(format!("factor `{}` has an out-of-range code", f.name)));
        }
        if f.levels.len() < 2 {
            return Err(Error::InsufficientData(format!("factor `{}` has fewer than two levels", f.name)));
        }
        if factors[..i].iter().any(|g| g.name == f.name) {
            return Err(Error::Config(format!("factor `{}` listed twice", f.name)));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("response has non-finite values".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientData("ANOVA needs at least two observations".into()));
    }

    let mean = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let total_ss: f64 = yc.iter().map(|v| v * v).sum();

    let sets = term_sets(factors.len(), max_order);
    let mut columns = vec![vec![1.0; n]];
    let mut names = vec!["(Intercept)".to_string()];
    let mut owner = vec![usize::MAX];
    for (t, set) in sets.iter().enumerate() {
        // Every combination of non-reference levels, first factor slowest.
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for &fi in set {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (1..factors[fi].levels.len()).map(move |l| {
                        let mut c = c.clone();
                        c.push(l);
                        c
                    })
                })
                .collect();
        }
        for combo in combos {
            let col: Vec<f64> = (0..n)
                .map(|i| if set.iter().zip(&combo).all(|(fi, l)| factors[*fi].codes[i] == *l) { 1.0 } else { 0.0 })
                .collect();
            let name = set
                .iter()
                .zip(&combo)
                .map(|(fi, l)| format!("{}[{}]", factors[*fi].name, factors[*fi].levels[*l]))
                .collect::<Vec<_>>()
                .join(":");
            columns.push(col);
            names.push(name);
            owner.push(t);
        }
    }

    let fit = qr_least_squares(&columns, &yc);
    let rank = fit.rank();
    if n <= rank {
        return Err(Error::InsufficientData(format!("{n} observations for {rank} model parameters")));
    }
    let df_res = n - rank;
    let rss = fit.rss();
    let ms_res = rss / df_res as f64;
    let mut notes = Vec::new();
    let degenerate = total_ss == 0.0;
    if degenerate {
        notes.push("response is constant; every sum of squares is zero".into());
    }

    let mut terms = Vec::with_capacity(sets.len());
    for (t, set) in sets.iter().enumerate() {
        let name = set.iter().map(|fi| factors[*fi].name.as_str()).collect::<Vec<_>>().join(":");
        let cols: Vec<usize> = (0..rank).filter(|k| owner[fit.kept[*k]] == t).collect();
        let df = cols.len();
        let ss: f64 = cols.iter().map(|k| fit.effects[*k] * fit.effects[*k]).sum();
        if df == 0 {
            notes.push(format!("term `{name}` is fully aliased with earlier terms"));
            terms.push(AnovaTerm { term: name, df, ss: 0.0, ms: 0.0, f: None, p: None });
            continue;
        }
        let ms = ss / df as f64;
        let (f, p) = if degenerate || (ss == 0.0 && ms_res == 0.0) {
            (Some(0.0), Some(1.0))
        } else if ms_res == 0.0 {
            (None, Some(0.0))
        } else {
            let f = ms / ms_res;
            (Some(f), Some(f_upper_p(f, df as f64, df_res as f64)?))
        };
        terms.push(AnovaTerm { term: name, df, ss, ms, f, p });
    }

    let variances = fit.unscaled_variances();
    let coefficients = (0..rank)
        .map(|k| {
            let estimate = fit.coefficients[k] + if fit.kept[k] == 0 { mean } else { 0.0 };
            let se = (ms_res * variances[k]).sqrt();
            let (t, p) = if se > 0.0 {
                let t = estimate / se;
                (Some(t), t_two_sided_p(t, df_res as f64).ok())
            } else {
                (None, None)
            };
            Coefficient { name: names[fit.kept[k]].clone(), estimate, se, t, p }
        })
        .collect();
    let dropped_columns: Vec<String> = fit.dropped.iter().map(|j| names[*j].clone()).collect();
    if !dropped_columns.is_empty() {
        notes.push(format!(
            "{} design columns dropped for empty or redundant factor combinations",
            dropped_columns.len()
        ));
    }

    Ok(AnovaReport {
        response: response.to_string(),
        factors: factors.iter().map(|f| f.name.clone()).collect(),
        max_order,
        n,
        terms,
        residual: ResidualRow { df: df_res, ss: rss, ms: ms_res },
        total_ss,
        coefficients,
        dropped_columns,
        notes,
    })
}

/// ANOVA of a numeric attribute on categorical ones over the scope's
/// observations; observations with any missing value are dropped.
pub fn anova(scope: &Scope<'_>, response: &str, factors: &[String], max_order: usize) -> Result<AnovaReport> {
    let r = scope.resolver();
    let resp = r.lookup(response)?;
    if resp.value_type != ValueType::Number {
        return Err(Error::Type(format!("`{response}` is not numeric")));
    }
    let mut attrs = vec![resp];
    for f in factors {
        let a = r.lookup(f)?;
        if a.value_type != ValueType::Category {
            return Err(Error::Type(format!("factor `{f}` is not categorical")));
        }
        attrs.push(a);
    }
    let mut y = Vec::new();
    let mut labels: Vec<Vec<String>> = vec![Vec::new(); factors.len()];
    let mut skipped = 0;
    for row in scope.observations(&attrs) {
        let cats: Option<Vec<&str>> = row[1..].iter().map(|v| v.as_category()).collect();
        match (row[0].as_f64(), cats) {
            (Some(v), Some(cats)) => {
                y.push(v);
                for (l, c) in labels.iter_mut().zip(cats) {
                    l.push(c.to_string());
                }
            }
            _ => skipped += 1,
        }
    }
    if y.is_empty() {
        return Err(Error::InsufficientData("no complete observations for ANOVA".into()));
    }
    let fs: Vec<Factor> = attrs[1..]
        .iter()
        .zip(labels)
        .map(|(a, ls)| {
            let levels = level_order(a, ls.iter().map(String::as_str));
            let codes = ls.iter().map(|l| levels.iter().position(|x| x == l).expect("observed level")).collect();
            Factor { name: a.name.clone(), levels, codes }
        })
        .collect();
    let mut report = fit_anova(response, &y, &fs, max_order)?;
    if skipped > 0 {
        report.notes.push(format!("{skipped} observations with missing values excluded"));
    }
    Ok(report)
}
