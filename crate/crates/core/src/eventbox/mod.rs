//! EventBox summaries of same-type event occurrences: quartiles and Tukey
//! outliers over the horizontal attribute, scatter points, stacked axis
//! histograms, breakdown into one box per category and merging back.

mod build;
mod density;
mod histogram;
mod lasso;
mod quantile;
mod svg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{OccurrenceId, SequenceId, AttributeValue, DURATION, START_TIME_OF_DAY};

pub use build::{breakdown, build_eventbox, merge};
pub use density::{density_grid, DensityGrid};
pub use lasso::{lasso_select, point_in_polygon};
pub use histogram::{Bar, Histogram, Stack, MISSING_LABEL, OTHER_LABEL};
pub use quantile::{quantile_sorted, quartiles, tukey_partition, Fences, FiveNumber, TukeyPartition};
pub use svg::{render_svg, SvgStyle};

/// Containers grow linearly with N up to this many occurrences, then with
/// the square root.
pub const HEIGHT_LINEAR_LIMIT: f64 = 500.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventBoxConfig {
    pub p_h: String,
    pub p_v: String,
    pub s_h: Option<String>,
    pub s_v: Option<String>,
    pub b: Option<String>,
    pub bins_h: usize,
    pub bins_v: usize,
    pub show_outliers: bool,
    pub w: f64,
    pub top_k: Option<usize>,
}

impl Default for EventBoxConfig {
    fn default() -> Self {
        EventBoxConfig {
            p_h: DURATION.into(),
            p_v: START_TIME_OF_DAY.into(),
            s_h: None,
            s_v: None,
            b: None,
            bins_h: 24,
            bins_v: 24,
            show_outliers: true,
            w: 1.5,
            top_k: None,
        }
    }
}

impl EventBoxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins_h == 0 || self.bins_v == 0 {
            return Err(Error::Config("histogram bin counts must be at least 1".into()));
        }
        if !(self.w.is_finite() && self.w > 0.0) {
            return Err(Error::Config(format!("whisker factor must be positive, got {}", self.w)));
        }
        if self.top_k == Some(0) {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        let roles = self.roles();
        for (i, (ra, a)) in roles.iter().enumerate() {
            if let Some((rb, _)) = roles[i + 1..].iter().find(|(_, b)| b == a) {
                return Err(Error::Config(format!("roles {ra} and {rb} both name `{a}`")));
            }
        }
        Ok(())
    }

    /// (role, attribute) for every role that is set.
    pub fn roles(&self) -> Vec<(&'static str, &str)> {
        let mut out = vec![("p_h", self.p_h.as_str()), ("p_v", self.p_v.as_str())];
        for (r, a) in [("s_h", &self.s_h), ("s_v", &self.s_v), ("b", &self.b)] {
            if let Some(a) = a {
                out.push((r, a.as_str()));
            }
        }
        out
    }
}

/// Order in which the categories of a role are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryOrder {
    /// Mon..Sun.
    Weekday,
    /// Most frequent first, ties alphabetical.
    Frequency,
    /// Alphabetical; used for quintile labels Q1..Q5.
    Lexical,
}

/// How the vertical attribute is laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VerticalScale {
    /// Minutes since midnight, binned over [0, 1440).
    TimeOfDay,
    Numeric,
    Categorical { order: CategoryOrder },
}

/// Category mapping for a secondary or breakdown role. Numeric attributes
/// are cut at their dataset-wide quintiles so labels stay stable across
/// selections, breakdowns and merges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleScale {
    pub attribute: String,
    pub order: CategoryOrder,
    /// Quintile cut points for numeric attributes, empty for categorical.
    pub edges: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub v: VerticalScale,
    pub s_h: Option<RoleScale>,
    pub s_v: Option<RoleScale>,
    pub b: Option<RoleScale>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub occurrence_id: OccurrenceId,
    pub sequence_id: SequenceId,
    pub x: f64,
    pub y: AttributeValue,
    pub s_h: Option<String>,
    pub s_v: Option<String>,
    /// Breakdown category, used as the point colour.
    pub color: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    /// Largest horizontal value over all occurrences.
    pub width: f64,
    /// N up to 500 occurrences, `500 * sqrt(N / 500)` beyond.
    pub height: f64,
}

impl Container {
    pub fn height_for(n: usize) -> f64 {
        let n = n as f64;
        if n <= HEIGHT_LINEAR_LIMIT {
            n
        } else {
            HEIGHT_LINEAR_LIMIT * (n / HEIGHT_LINEAR_LIMIT).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventBox {
    pub event_type: String,
    pub dataset_version: u64,
    pub config: EventBoxConfig,
    pub scales: Scales,
    /// Set on the children of a breakdown.
    pub breakdown_value: Option<String>,
    pub n: usize,
    pub occurrence_ids: Vec<OccurrenceId>,
    pub summary: FiveNumber<f64>,
    pub fences: Fences<f64>,
    pub outliers: Vec<OccurrenceId>,
    pub points: Vec<Point>,
    pub hist_h: Histogram,
    pub hist_v: Histogram,
    pub container: Container,
    /// Selected occurrences left out because the horizontal value is missing.
    pub excluded_missing_h: usize,
}

impl EventBox {
    pub fn is_outlier(&self, id: OccurrenceId) -> bool {
        self.outliers.binary_search(&id).is_ok()
    }
}
