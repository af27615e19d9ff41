use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, OccurrenceId, ProvenanceEntry, SequenceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorStrength {
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub event_type: String,
    pub strength: AnchorStrength,
}

impl Anchor {
    pub fn hard(t: &str) -> Self {
        Anchor { event_type: t.into(), strength: AnchorStrength::Hard }
    }

    pub fn soft(t: &str) -> Self {
        Anchor { event_type: t.into(), strength: AnchorStrength::Soft }
    }
}

/// Anchors in their expected left-to-right order. A soft anchor belongs to
/// the segment between the hard anchors listed around it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Anchor>", into = "Vec<Anchor>")]
pub struct AnchorSpec(Vec<Anchor>);

impl AnchorSpec {
    pub fn new(anchors: Vec<Anchor>) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::Config("alignment needs at least one anchor".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &anchors {
            if !seen.insert(a.event_type.as_str()) {
                return Err(Error::Config(format!("anchor `{}` listed twice", a.event_type)));
            }
        }
        Ok(AnchorSpec(anchors))
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.0
    }

    fn hard(&self) -> Vec<&str> {
        self.0
            .iter()
            .filter(|a| a.strength == AnchorStrength::Hard)
            .map(|a| a.event_type.as_str())
            .collect()
    }

    /// Soft anchors grouped by the inter-hard segment they sit in.
    fn soft_groups(&self) -> Vec<Vec<&str>> {
        let mut groups = vec![Vec::new()];
        for a in &self.0 {
            match a.strength {
                AnchorStrength::Hard => groups.push(Vec::new()),
                AnchorStrength::Soft => groups.last_mut().expect("non-empty").push(a.event_type.as_str()),
            }
        }
        groups
    }
}

impl TryFrom<Vec<Anchor>> for AnchorSpec {
    type Error = Error;

    fn try_from(v: Vec<Anchor>) -> Result<Self> {
        AnchorSpec::new(v)
    }
}

impl From<AnchorSpec> for Vec<Anchor> {
    fn from(s: AnchorSpec) -> Self {
        s.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedRow {
    pub sequence_id: SequenceId,
    /// `None` is a GAP.
    pub cells: Vec<Option<OccurrenceId>>,
}

impl AlignedRow {
    pub fn occurrences(&self) -> impl Iterator<Item = OccurrenceId> + '_ {
        self.cells.iter().flatten().copied()
    }
}

/// Gap-padded matrix of occurrences, one row per sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedView {
    pub dataset_version: u64,
    pub rows: Vec<AlignedRow>,
    pub column_count: usize,
    pub anchor_columns: BTreeMap<String, usize>,
    pub steps: Vec<ProvenanceEntry>,
}

impl AlignedView {
    /// Sequences left-justified and padded to a common width.
    pub fn unaligned(dataset: &Dataset) -> Self {
        let width = dataset.sequences().iter().map(|s| s.events.len()).max().unwrap_or(0);
        let rows = dataset
            .sequences()
            .iter()
            .map(|s| {
                let mut cells: Vec<_> = s.events.iter().map(|e| Some(e.id)).collect();
                cells.resize(width, None);
                AlignedRow { sequence_id: s.id.clone(), cells }
            })
            .collect();
        AlignedView {
            dataset_version: dataset.version(),
            rows,
            column_count: width,
            anchor_columns: BTreeMap::new(),
            steps: Vec::new(),
        }
    }
}

#[derive(Clone, Copy)]
struct Item<'a> {
    id: OccurrenceId,
    ty: &'a str,
}

struct Block {
    rows: Vec<Vec<Option<OccurrenceId>>>,
    width: usize,
    anchor_columns: Vec<(String, usize)>,
}

fn left_justify(rows: &[&[Item]]) -> Block {
    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let rows = rows
        .iter()
        .map(|r| {
            let mut cells: Vec<_> = r.iter().map(|i| Some(i.id)).collect();
            cells.resize(width, None);
            cells
        })
        .collect();
    Block { rows, width, anchor_columns: Vec::new() }
}

/// Places `anchors` in global columns (greedy leftmost match after the
/// previous match) and lays out the segments between them. `segment_anchors`
/// holds, per segment, the anchors applied recursively inside it.
fn align_block(rows: &[&[Item]], anchors: &[&str], segment_anchors: &[Vec<&str>]) -> Block {
    if anchors.is_empty() && segment_anchors.iter().all(Vec::is_empty) {
        return left_justify(rows);
    }
    let m = anchors.len();
    let mut segments: Vec<Vec<&[Item]>> = vec![Vec::with_capacity(rows.len()); m + 1];
    let mut matched: Vec<Vec<Option<OccurrenceId>>> = vec![Vec::with_capacity(rows.len()); m];
    for row in rows {
        let mut seg_start = 0;
        let mut seg = 0;
        let mut row_segs: Vec<&[Item]> = vec![&[]; m + 1];
        for (j, a) in anchors.iter().enumerate() {
            match row[seg_start..].iter().position(|it| it.ty == *a) {
                Some(off) => {
                    let k = seg_start + off;
                    row_segs[seg] = &row[seg_start..k];
                    matched[j].push(Some(row[k].id));
                    seg_start = k + 1;
                    seg = j + 1;
                }
                None => matched[j].push(None),
            }
        }
        row_segs[seg] = &row[seg_start..];
        for (i, s) in row_segs.into_iter().enumerate() {
            segments[i].push(s);
        }
    }

    let mut out = Block { rows: vec![Vec::new(); rows.len()], width: 0, anchor_columns: Vec::new() };
    for (i, seg_rows) in segments.iter().enumerate() {
        let inner = segment_anchors.get(i).map(Vec::as_slice).unwrap_or(&[]);
        let block = if inner.is_empty() { left_justify(seg_rows) } else { align_block(seg_rows, inner, &[]) };
        for (dst, src) in out.rows.iter_mut().zip(block.rows) {
            dst.extend(src);
        }
        out.anchor_columns.extend(block.anchor_columns.into_iter().map(|(t, c)| (t, c + out.width)));
        out.width += block.width;
        // Anchors matched by no row get no column.
        if i < m && matched[i].iter().any(Option::is_some) {
            for (dst, cell) in out.rows.iter_mut().zip(&matched[i]) {
                dst.push(*cell);
            }
            out.anchor_columns.push((anchors[i].to_string(), out.width));
            out.width += 1;
        }
    }
    out
}

/// Hard anchors get global columns first; soft anchors are then aligned
/// inside the segment between the hard anchors that surround them in the
/// spec. Every row keeps its original event order.
pub fn align(dataset: &Dataset, anchors: &AnchorSpec) -> AlignedView {
    let items: Vec<Vec<Item>> = dataset
        .sequences()
        .iter()
        .map(|s| s.events.iter().map(|e| Item { id: e.id, ty: e.event_type.as_str() }).collect())
        .collect();
    let rows: Vec<&[Item]> = items.iter().map(Vec::as_slice).collect();
    let block = align_block(&rows, &anchors.hard(), &anchors.soft_groups());
    let rows = dataset
        .sequences()
        .iter()
        .zip(block.rows)
        .map(|(s, cells)| AlignedRow { sequence_id: s.id.clone(), cells })
        .collect();
    AlignedView {
        dataset_version: dataset.version(),
        rows,
        column_count: block.width,
        anchor_columns: block.anchor_columns.into_iter().collect(),
        steps: vec![ProvenanceEntry {
            op: "align".into(),
            params: serde_json::to_value(anchors).unwrap_or_default(),
            input_version: Some(dataset.version()),
            output_version: dataset.version(),
        }],
    }
}
