use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::OccurrenceId;

use super::{EventBox, VerticalScale};

/// Point counts on a `cols x rows` grid over the box's horizontal extent and
/// vertical range. Row 0 is the lowest vertical value; categorical vertical
/// attributes use the category positions of the vertical histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub cols: usize,
    pub rows: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// `counts[row][col]`
    pub counts: Vec<Vec<usize>>,
    /// Count divided by the largest cell count.
    pub intensity: Vec<Vec<f64>>,
    /// Points without a vertical value; they are not placed on the grid.
    pub missing: usize,
}

fn cell(v: f64, lo: f64, hi: f64, n: usize) -> usize {
    if hi <= lo {
        return 0;
    }
    let c = ((v - lo) / (hi - lo) * n as f64).floor();
    if c < 0.0 {
        0
    } else {
        (c as usize).min(n - 1)
    }
}

pub fn density_grid(bx: &EventBox, cols: usize, rows: usize) -> Result<DensityGrid> {
    if cols == 0 || rows == 0 {
        return Err(Error::Config("density grid needs at least one column and one row".into()));
    }
    let ys: Vec<Option<f64>> = match &bx.scales.v {
        VerticalScale::Categorical { .. } => {
            let bar_of: HashMap<OccurrenceId, usize> = bx
                .hist_v
                .bars
                .iter()
                .enumerate()
                .flat_map(|(i, b)| b.occurrence_ids.iter().map(move |id| (*id, i)))
                .collect();
            bx.points.iter().map(|p| bar_of.get(&p.occurrence_id).map(|i| *i as f64)).collect()
        }
        _ => bx.points.iter().map(|p| p.y.as_f64()).collect(),
    };
    let x_range = (bx.summary.min.min(0.0), bx.summary.max);
    let y_range = match &bx.scales.v {
        VerticalScale::TimeOfDay => (0.0, 1440.0),
        VerticalScale::Categorical { .. } => (0.0, bx.hist_v.bars.len() as f64),
        VerticalScale::Numeric => {
            let (lo, hi) = ys.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(*y), hi.max(*y)));
            if lo.is_finite() {
                (lo, hi)
            } else {
                (0.0, 1.0)
            }
        }
    };
    let mut counts = vec![vec![0usize; cols]; rows];
    let mut missing = 0;
    for (p, y) in bx.points.iter().zip(&ys) {
        match y {
            Some(y) => counts[cell(*y, y_range.0, y_range.1, rows)][cell(p.x, x_range.0, x_range.1, cols)] += 1,
            None => missing += 1,
        }
    }
    let max = counts.iter().flatten().copied().max().unwrap_or(0);
    let intensity = counts
        .iter()
        .map(|r| r.iter().map(|c| if max == 0 { 0.0 } else { *c as f64 / max as f64 }).collect())
        .collect();
    Ok(DensityGrid { cols, rows, x_range, y_range, counts, intensity, missing })
}
