use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ValueType;

use super::special::chisq_upper_p;
use super::{level_order, Scope};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p: f64,
    /// Rows and columns of the input kept after dropping zero marginals.
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
    /// Expected counts over the kept cells.
    pub expected: Vec<Vec<f64>>,
    /// Some expected count is below 5.
    pub low_expected: bool,
}

/// Pearson chi-square test of independence. Rows or columns with a zero
/// total are dropped first.
pub fn chi_square_independence(observed: &[Vec<f64>]) -> Result<ChiSquareTest> {
    let ncols = observed.first().map_or(0, Vec::len);
    if observed.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config("contingency table rows differ in length".into()));
    }
    if observed.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Numeric("contingency counts must be finite and non-negative".into()));
    }
    let kept_rows: Vec<usize> = (0..observed.len()).filter(|i| observed[*i].iter().sum::<f64>() > 0.0).collect();
    let kept_cols: Vec<usize> =
        (0..ncols).filter(|j| observed.iter().map(|r| r[*j]).sum::<f64>() > 0.0).collect();
    if kept_rows.len() < 2 || kept_cols.len() < 2 {
        return Err(Error::InsufficientData("contingency table needs two non-empty rows and columns".into()));
    }
    let row_tot: Vec<f64> = kept_rows.iter().map(|i| kept_cols.iter().map(|j| observed[*i][*j]).sum()).collect();
    let col_tot: Vec<f64> = kept_cols.iter().map(|j| kept_rows.iter().map(|i| observed[*i][*j]).sum()).collect();
    let n: f64 = row_tot.iter().sum();
    let mut statistic = 0.0;
    let mut expected = Vec::with_capacity(kept_rows.len());
    for (a, i) in kept_rows.iter().enumerate() {
        let mut row = Vec::with_capacity(kept_cols.len());
        for (b, j) in kept_cols.iter().enumerate() {
            let e = row_tot[a] * col_tot[b] / n;
            let d = observed[*i][*j] - e;
            statistic += d * d / e;
            row.push(e);
        }
        expected.push(row);
    }
    let df = (kept_rows.len() - 1) * (kept_cols.len() - 1);
    let low_expected = expected.iter().flatten().any(|e| *e < 5.0);
    Ok(ChiSquareTest { statistic, df, p: chisq_upper_p(statistic, df as f64)?, kept_rows, kept_cols, expected, low_expected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyResult {
    pub row_attribute: String,
    pub col_attribute: String,
    pub row_levels: Vec<String>,
    pub col_levels: Vec<String>,
    pub observed: Vec<Vec<u64>>,
    pub expected: Vec<Vec<f64>>,
    pub chi_square: f64,
    pub df: usize,
    pub p: f64,
    pub n: u64,
    pub low_expected: bool,
    pub notes: Vec<String>,
}

/// Cross-tabulates two categorical attributes over the observations where
/// both are present and tests them for independence.
pub fn contingency(scope: &Scope<'_>, attr_a: &str, attr_b: &str) -> Result<ContingencyResult> {
    let r = scope.resolver();
    let a = r.lookup(attr_a)?;
    let b = r.lookup(attr_b)?;
    for x in [&a, &b] {
        if x.value_type != ValueType::Category {
            return Err(Error::Type(format!("`{}` is not categorical", x.name)));
        }
    }
    let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
    let mut skipped = 0;
    for row in scope.observations(&[a.clone(), b.clone()]) {
        match (row[0].as_category(), row[1].as_category()) {
            (Some(x), Some(y)) => *counts.entry((x.to_string(), y.to_string())).or_default() += 1,
            _ => skipped += 1,
        }
    }
    let rows = level_order(&a, counts.keys().map(|k| k.0.as_str()));
    let cols = level_order(&b, counts.keys().map(|k| k.1.as_str()));
    if rows.len() < 2 || cols.len() < 2 {
        return Err(Error::InsufficientData(format!("`{attr_a}` and `{attr_b}` each need two observed levels")));
    }
    let observed: Vec<Vec<u64>> = rows
        .iter()
        .map(|x| cols.iter().map(|y| counts.get(&(x.clone(), y.clone())).copied().unwrap_or(0)).collect())
        .collect();
    let as_f: Vec<Vec<f64>> = observed.iter().map(|r| r.iter().map(|v| *v as f64).collect()).collect();
    let test = chi_square_independence(&as_f)?;
    let mut notes = Vec::new();
    if skipped > 0 {
        notes.push(format!("{skipped} observations with a missing value excluded"));
    }
    if test.low_expected {
        notes.push("some expected counts are below 5; the chi-square approximation may be poor".into());
    }
    Ok(ContingencyResult {
        row_attribute: attr_a.to_string(),
        col_attribute: attr_b.to_string(),
        n: observed.iter().flatten().sum(),
        row_levels: rows,
        col_levels: cols,
        observed,
        expected: test.expected,
        chi_square: test.statistic,
        df: test.df,
        p: test.p,
        low_expected: test.low_expected,
        notes,
    })
}
