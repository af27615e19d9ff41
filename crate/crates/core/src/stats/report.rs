use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::ClusterAssignment;
use crate::model::{Dataset, SelectionSet};

use super::anova::{anova, AnovaReport};
use super::contingency::{contingency, ContingencyResult};
use super::means::{mean_comparison, MeanTestTable};
use super::Scope;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    pub continuous: Vec<String>,
    pub categorical: Vec<String>,
    /// Response of the ANOVA; no ANOVA when absent.
    pub response: Option<String>,
    /// ANOVA factors; defaults to `categorical`.
    pub factors: Option<Vec<String>>,
    pub max_order: usize,
    pub alpha: f64,
    /// Restrict event-level observations to one event type.
    pub event_type: Option<String>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            continuous: Vec::new(),
            categorical: Vec::new(),
            response: None,
            factors: None,
            max_order: 2,
            alpha: 0.05,
            event_type: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub section: String,
    pub label: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub dataset_version: u64,
    pub selection_origin: String,
    pub n_sequences: usize,
    pub n_occurrences: usize,
    pub event_type: Option<String>,
    pub alpha: f64,
    pub sum_of_squares: String,
    pub mean_tables: Vec<MeanTestTable>,
    pub contingency_tables: Vec<ContingencyResult>,
    pub anova: Option<AnovaReport>,
    /// Entries with p below alpha. p-values are not adjusted for the
    /// number of tests, which is reported in `n_tests`.
    pub flags: Vec<Flag>,
    pub n_tests: usize,
    pub notes: Vec<String>,
}

/// Runs every configured analysis over the selection. A failing component
/// becomes a note instead of aborting the report.
pub fn generate_report(
    dataset: &Dataset,
    clusters: Option<&ClusterAssignment>,
    selection: &SelectionSet,
    config: &ReportConfig,
) -> Result<StatReport> {
    selection.check_version(dataset)?;
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", config.alpha)));
    }
    let scope = Scope::new(dataset, selection).with_clusters(clusters).with_event_type(config.event_type.as_deref());
    let resolver = scope.resolver();
    let factors = config.factors.clone().unwrap_or_else(|| config.categorical.clone());
    for name in config.continuous.iter().chain(&config.categorical).chain(&config.response).chain(&factors) {
        resolver.lookup(name)?;
    }
    if selection.sequence_ids.is_empty() {
        return Err(Error::InsufficientData("the selection is empty".into()));
    }

    let mut notes = Vec::new();
    let mut flags = Vec::new();
    let mut n_tests = 0;
    let flag = |flags: &mut Vec<Flag>, section: &str, label: String, p: f64| {
        if p < config.alpha {
            flags.push(Flag { section: section.into(), label, p });
        }
    };

    let mut mean_tables = Vec::new();
    for resp in &config.continuous {
        for group in &config.categorical {
            match mean_comparison(&scope, resp, group) {
                Ok(t) => {
                    for pt in &t.tests {
                        n_tests += 1;
                        flag(&mut flags, "mean", format!("{resp} by {group}: {} vs {}", pt.a, pt.b), pt.p);
                    }
                    mean_tables.push(t);
                }
                Err(e) => notes.push(format!("mean comparison of {resp} by {group}: {e}")),
            }
        }
    }

    let mut contingency_tables = Vec::new();
    for (i, a) in config.categorical.iter().enumerate() {
        for b in &config.categorical[i + 1..] {
            match contingency(&scope, a, b) {
                Ok(c) => {
                    n_tests += 1;
                    flag(&mut flags, "contingency", format!("{a} x {b}"), c.p);
                    contingency_tables.push(c);
                }
                Err(e) => notes.push(format!("contingency of {a} x {b}: {e}")),
            }
        }
    }

    let mut anova_report = None;
    if let Some(resp) = &config.response {
        let order = config.max_order.min(factors.len()).max(1);
        match anova(&scope, resp, &factors, order) {
            Ok(r) => {
                for t in &r.terms {
                    if let Some(p) = t.p {
                        n_tests += 1;
                        flag(&mut flags, "anova", t.term.clone(), p);
                    }
                }
                anova_report = Some(r);
            }
            Err(e) => notes.push(format!("ANOVA of {resp}: {e}")),
        }
    }

    Ok(StatReport {
        dataset_version: dataset.version(),
        selection_origin: selection.origin.clone(),
        n_sequences: selection.sequence_ids.len(),
        n_occurrences: selection.occurrence_ids.len(),
        event_type: config.event_type.clone(),
        alpha: config.alpha,
        sum_of_squares: "sequential (type I), terms in model order".into(),
        mean_tables,
        contingency_tables,
        anova: anova_report,
        flags,
        n_tests,
        notes,
    })
}

fn fmt_p(p: Option<f64>) -> String {
    match p {
        Some(p) if p < 1e-4 => format!("{p:.2e}"),
        Some(p) => format!("{p:.4}"),
        None => "-".into(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.4}"))
}

/// Human-readable rendering of a report.
pub fn render_markdown(r: &StatReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Statistical report\n");
    let _ = writeln!(
        s,
        "Dataset version {}, selection `{}`: {} sequences, {} occurrences{}.",
        r.dataset_version,
        r.selection_origin,
        r.n_sequences,
        r.n_occurrences,
        r.event_type.as_ref().map_or(String::new(), |t| format!(", event type `{t}`"))
    );
    let _ = writeln!(
        s,
        "Significance level {}; {} tests, p-values unadjusted. ANOVA sums of squares are {}.\n",
        r.alpha, r.n_tests, r.sum_of_squares
    );

    if !r.flags.is_empty() {
        let _ = writeln!(s, "## Significant results\n");
        for f in &r.flags {
            let _ = writeln!(s, "- {} ({}): p = {}", f.label, f.section, fmt_p(Some(f.p)));
        }
        s.push('\n');
    }

    for t in &r.mean_tables {
        let _ = writeln!(s, "## {} by {} (n = {})\n", t.response, t.grouping, t.n);
        let _ = writeln!(s, "| level | n | mean | sd |\n|---|---:|---:|---:|");
        for g in &t.groups {
            let _ = writeln!(s, "| {} | {} | {:.4} | {:.4} |", g.label, g.n, g.mean, g.sd);
        }
        let _ = writeln!(s, "\n| pair | t | df | p |\n|---|---:|---:|---:|");
        for p in &t.tests {
            let _ = writeln!(s, "| {} vs {} | {:.4} | {:.2} | {} |", p.a, p.b, p.t, p.df, fmt_p(Some(p.p)));
        }
        for n in &t.notes {
            let _ = writeln!(s, "\n_{n}_");
        }
        s.push('\n');
    }

    for c in &r.contingency_tables {
        let _ = writeln!(s, "## {} x {} (n = {})\n", c.row_attribute, c.col_attribute, c.n);
        let _ = writeln!(s, "| | {} |", c.col_levels.join(" | "));
        let _ = writeln!(s, "|---|{}", "---:|".repeat(c.col_levels.len()));
        for (l, row) in c.row_levels.iter().zip(&c.observed) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(s, "| {l} | {} |", cells.join(" | "));
        }
        let _ = writeln!(s, "\nchi-square = {:.4}, df = {}, p = {}", c.chi_square, c.df, fmt_p(Some(c.p)));
        for n in &c.notes {
            let _ = writeln!(s, "\n_{n}_");
        }
        s.push('\n');
    }

    if let Some(a) = &r.anova {
        let _ = writeln!(s, "## ANOVA of {} on {} (n = {})\n", a.response, a.factors.join(", "), a.n);
        let _ = writeln!(s, "| term | df | SS | MS | F | p |\n|---|---:|---:|---:|---:|---:|");
        for t in &a.terms {
            let _ = writeln!(
                s,
                "| {} | {} | {:.4} | {:.4} | {} | {} |",
                t.term, t.df, t.ss, t.ms, fmt_opt(t.f), fmt_p(t.p)
            );
        }
        let _ = writeln!(s, "| residual | {} | {:.4} | {:.4} | | |", a.residual.df, a.residual.ss, a.residual.ms);
        let _ = writeln!(s, "\n| coefficient | estimate | se | t | p |\n|---|---:|---:|---:|---:|");
        for c in &a.coefficients {
            let _ = writeln!(s, "| {} | {:.4} | {:.4} | {} | {} |", c.name, c.estimate, c.se, fmt_opt(c.t), fmt_p(c.p));
        }
        for n in &a.notes {
            let _ = writeln!(s, "\n_{n}_");
        }
        s.push('\n');
    }

    if !r.notes.is_empty() {
        let _ = writeln!(s, "## Notes\n");
        for n in &r.notes {
            let _ = writeln!(s, "- {n}");
        }
    }
    s
}
