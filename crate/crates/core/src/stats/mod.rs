//! Statistical report: pairwise mean comparisons, contingency tables with
//! chi-square tests and factorial ANOVA, plus the numerics behind them.

mod anova;
mod contingency;
mod means;
mod qr;
mod report;
mod special;

use std::collections::BTreeSet;

use crate::grouping::{ClusterAssignment, Resolver};
use crate::model::{weekday_index, AttrRef, AttributeValue, Dataset, Derived, Level, SelectionSet};

pub use anova::{anova, fit_anova, AnovaReport, AnovaTerm, Coefficient, Factor, ResidualRow};
pub use contingency::{chi_square_independence, contingency, ChiSquareTest, ContingencyResult};
pub use means::{mean_comparison, welch_t_test, GroupStats, MeanTestTable, PairTest, WelchTest};
pub use qr::{qr_least_squares, QrFit};
pub use report::{generate_report, render_markdown, Flag, ReportConfig, StatReport};
pub use special::{
    beta_reg, chisq_upper_p, f_upper_p, gamma_reg, ln_gamma, special_cdf, t_two_sided_p, Distribution,
};

/// What a statistic is computed over.
///
/// When every attribute involved is sequence-level there is one observation
/// per selected sequence. Otherwise there is one per selected occurrence
/// (restricted to `event_type` when given) and sequence-level values are
/// repeated for each of the sequence's occurrences.
#[derive(Clone, Copy)]
pub struct Scope<'a> {
    pub dataset: &'a Dataset,
    pub clusters: Option<&'a ClusterAssignment>,
    pub selection: &'a SelectionSet,
    pub event_type: Option<&'a str>,
}

impl<'a> Scope<'a> {
    pub fn new(dataset: &'a Dataset, selection: &'a SelectionSet) -> Self {
        Scope { dataset, clusters: None, selection, event_type: None }
    }

    pub fn with_clusters(mut self, clusters: Option<&'a ClusterAssignment>) -> Self {
        self.clusters = clusters;
        self
    }

    pub fn with_event_type(mut self, event_type: Option<&'a str>) -> Self {
        self.event_type = event_type;
        self
    }

    pub(crate) fn resolver(&self) -> Resolver<'a> {
        Resolver::new(self.dataset, self.clusters)
    }

    /// Attribute values of every observation, one row per observation.
    pub(crate) fn observations(&self, attrs: &[AttrRef]) -> Vec<Vec<AttributeValue>> {
        let r = self.resolver();
        if attrs.iter().all(|a| a.level == Level::Sequence) {
            self.dataset
                .sequences()
                .iter()
                .filter(|s| self.selection.sequence_ids.contains(&s.id))
                .map(|s| attrs.iter().map(|a| r.sequence_value(s, a)).collect())
                .collect()
        } else {
            self.selection
                .occurrence_ids
                .keys()
                .filter_map(|id| self.dataset.occurrence(*id))
                .filter(|(_, e)| self.event_type.is_none_or(|t| e.event_type == t))
                .map(|(s, e)| attrs.iter().map(|a| r.value(s, e, a)).collect())
                .collect()
        }
    }
}

/// Levels in natural order: weekday order for `day_of_week`, numeric order
/// for labels like C1..C15 sharing a prefix, alphabetical otherwise.
pub(crate) fn level_order<'s>(attr: &AttrRef, labels: impl IntoIterator<Item = &'s str>) -> Vec<String> {
    let set: BTreeSet<&str> = labels.into_iter().collect();
    let mut out: Vec<String> = set.into_iter().map(String::from).collect();
    if attr.derived == Some(Derived::DayOfWeek) {
        out.sort_by_key(|l| (weekday_index(l).unwrap_or(usize::MAX), l.clone()));
        return out;
    }
    let split = |s: &str| {
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (p, n) = s.split_at(s.len() - digits);
        n.parse::<u64>().ok().map(|n| (p.to_string(), n))
    };
    let parts: Option<Vec<(String, u64)>> = out.iter().map(|s| split(s)).collect();
    if let Some(parts) = parts {
        if parts.windows(2).all(|w| w[0].0 == w[1].0) {
            let mut paired: Vec<_> = parts.into_iter().zip(out).collect();
            paired.sort_by(|a, b| a.0 .1.cmp(&b.0 .1).then(a.1.cmp(&b.1)));
            return paired.into_iter().map(|(_, l)| l).collect();
        }
    }
    out
}

pub(crate) fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AttributeSchema;

    #[test]
    fn natural_level_order() {
        let schema = AttributeSchema::default();
        let cluster = schema.lookup("cluster").unwrap();
        assert_eq!(level_order(&cluster, ["C10", "C2", "C1"]), ["C1", "C2", "C10"]);
        assert_eq!(level_order(&cluster, ["b", "a1", "a"]), ["a", "a1", "b"]);
        let dow = schema.lookup("day_of_week").unwrap();
        assert_eq!(level_order(&dow, ["Sun", "Tue", "Mon"]), ["Mon", "Tue", "Sun"]);
    }
}
