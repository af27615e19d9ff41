//! Static SVG rendering of an EventBox: container, shaded quartile bands,
//! quartile lines, points and the two axis histograms.
//!
//! Horizontal positions are an affine image of the payload values:
//! `x = MARGIN + (v - x0) * PLOT_WIDTH / (extent - x0)` with
//! `x0 = min(0, summary.min)`. The extent is the container width, or the
//! upper fence when outliers are hidden and lie beyond it.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::model::weekday_index;

use super::{CategoryOrder, EventBox, Histogram, VerticalScale, MISSING_LABEL};

pub const PLOT_WIDTH: f64 = 480.0;
pub const MARGIN: f64 = 20.0;
const GAP: f64 = 8.0;
const HIST: f64 = 60.0;
const POINT_RADIUS: f64 = 2.0;
const OUTLIER_GREY: &str = "#d3d3d3";

/// Categorical palette for event types.
pub const EVENT_PALETTE: [&str; 10] =
    ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"];
/// Palette for breakdown and stack categories.
pub const CATEGORY_PALETTE: [&str; 8] =
    ["#66c2a5", "#fc8d62", "#8da0cb", "#e78ac3", "#a6d854", "#ffd92f", "#e5c494", "#b3b3b3"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvgStyle {
    /// Container hue, one per event type.
    pub hue: String,
}

impl SvgStyle {
    /// Style for the event type at `index` in first-appearance order.
    pub fn for_type_index(index: usize) -> Self {
        SvgStyle { hue: EVENT_PALETTE[index % EVENT_PALETTE.len()].to_string() }
    }
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle::for_type_index(0)
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Colour rank of each category, following the role's listing order with
/// the missing label last.
fn category_ranks<'a>(labels: impl Iterator<Item = &'a str>, order: CategoryOrder) -> BTreeMap<&'a str, usize> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let mut keys: Vec<(&str, usize)> = counts.into_iter().collect();
    keys.sort_by(|(a, ca), (b, cb)| {
        let missing = (*a == MISSING_LABEL).cmp(&(*b == MISSING_LABEL));
        let by_order = match order {
            CategoryOrder::Weekday => weekday_index(a).unwrap_or(7).cmp(&weekday_index(b).unwrap_or(7)),
            CategoryOrder::Frequency => cb.cmp(ca),
            CategoryOrder::Lexical => std::cmp::Ordering::Equal,
        };
        missing.then(by_order).then(a.cmp(b))
    });
    keys.into_iter().enumerate().map(|(i, (k, _))| (k, i)).collect()
}

fn stack_ranks(h: &Histogram) -> BTreeMap<&str, usize> {
    let mut ranks = BTreeMap::new();
    for s in h.bars.iter().flat_map(|b| &b.stacks) {
        let next = ranks.len();
        ranks.entry(s.value.as_str()).or_insert(next);
    }
    ranks
}

fn palette(rank: usize) -> &'static str {
    CATEGORY_PALETTE[rank % CATEGORY_PALETTE.len()]
}

/// Renders the box as a standalone SVG document. Identical boxes give
/// identical text.
pub fn render_svg(bx: &EventBox, style: &SvgStyle) -> String {
    let s = &bx.summary;
    let x0 = s.min.min(0.0);
    let extent = if bx.config.show_outliers { bx.container.width } else { bx.container.width.min(bx.fences.upper) };
    let extent = if extent > x0 { extent } else { x0 + 1.0 };
    let scale = PLOT_WIDTH / (extent - x0);
    let sx = |v: f64| MARGIN + (v.min(extent) - x0) * scale;
    let height = bx.container.height.max(1.0);
    let top = MARGIN;
    let bottom = top + height;
    let total_w = MARGIN + PLOT_WIDTH + GAP + HIST + MARGIN;
    let total_h = MARGIN + height + GAP + HIST + MARGIN;
    let hue = escape(&style.hue);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        num(total_w),
        num(total_h),
        num(total_w),
        num(total_h)
    );
    let label = match &bx.breakdown_value {
        Some(v) => format!("{} [{}] N={}", bx.event_type, v, bx.n),
        None => format!("{} N={}", bx.event_type, bx.n),
    };
    let _ = writeln!(out, r#"<text class="title" x="{}" y="{}" font-size="11">{}</text>"#, num(MARGIN), num(MARGIN - 6.0), escape(&label));

    // Bands between consecutive quartile lines, alternating saturation.
    let stats = [("min", s.min), ("q1", s.q1), ("q2", s.q2), ("q3", s.q3), ("max", s.max)];
    for (i, w) in stats.windows(2).enumerate() {
        let (a, b) = (w[0].1, w[1].1.min(extent));
        if a > extent {
            continue;
        }
        let opacity = if i % 2 == 0 { "0.45" } else { "0.20" };
        let _ = writeln!(
            out,
            r#"<rect class="band" x="{}" y="{}" width="{}" height="{}" fill="{hue}" fill-opacity="{opacity}"/>"#,
            num(sx(a)),
            num(top),
            num(sx(b) - sx(a)),
            num(height)
        );
    }
    if bx.config.show_outliers && !bx.outliers.is_empty() {
        let regions = [(s.min, bx.fences.lower), (bx.fences.upper, s.max)];
        for (a, b) in regions {
            if a < b {
                let _ = writeln!(
                    out,
                    r#"<rect class="beyond-fence" x="{}" y="{}" width="{}" height="{}" fill="{OUTLIER_GREY}"/>"#,
                    num(sx(a)),
                    num(top),
                    num(sx(b) - sx(a)),
                    num(height)
                );
            }
        }
    }
    let _ = writeln!(
        out,
        r#"<rect class="container" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="{hue}"/>"#,
        num(MARGIN),
        num(top),
        num(PLOT_WIDTH),
        num(height)
    );
    for (name, v) in stats {
        if v > extent {
            continue;
        }
        let _ = writeln!(
            out,
            r#"<line class="quartile" data-stat="{name}" x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{hue}"/>"#,
            num(top),
            num(bottom),
            x = num(sx(v))
        );
    }

    // Points.
    let v_bars: BTreeMap<&str, usize> =
        bx.hist_v.bars.iter().enumerate().map(|(i, b)| (b.label.as_str(), i)).collect();
    let (v_lo, v_hi) = match &bx.scales.v {
        VerticalScale::TimeOfDay => (0.0, 1440.0),
        _ => (
            bx.hist_v.edges.first().copied().unwrap_or(0.0),
            bx.hist_v.edges.last().copied().unwrap_or(1.0),
        ),
    };
    let sy = |p: &super::Point| -> Option<f64> {
        match &bx.scales.v {
            VerticalScale::Categorical { .. } => {
                let i = *v_bars.get(p.y.as_category()?)?;
                Some(top + (i as f64 + 0.5) / bx.hist_v.bars.len() as f64 * height)
            }
            _ => {
                let y = p.y.as_f64()?;
                let span = if v_hi > v_lo { v_hi - v_lo } else { 1.0 };
                Some(top + (y - v_lo) / span * height)
            }
        }
    };
    let b_order = bx.scales.b.as_ref().map(|b| b.order).unwrap_or(CategoryOrder::Frequency);
    let ranks = category_ranks(bx.points.iter().filter_map(|p| p.color.as_deref()), b_order);
    for p in &bx.points {
        if !bx.config.show_outliers && bx.is_outlier(p.occurrence_id) {
            continue;
        }
        let Some(y) = sy(p) else { continue };
        let fill = match &p.color {
            Some(c) => palette(ranks[c.as_str()]).to_string(),
            None => hue.clone(),
        };
        let _ = writeln!(
            out,
            r#"<circle class="point" data-id="{}" cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            p.occurrence_id.0,
            num(sx(p.x)),
            num(y),
            num(POINT_RADIUS)
        );
    }

    // Horizontal histogram under the container, bars growing downwards.
    let h_top = bottom + GAP;
    let h_max = bx.hist_h.bars.iter().map(|b| b.total).max().unwrap_or(0).max(1) as f64;
    let h_stacks = stack_ranks(&bx.hist_h);
    for (i, bar) in bx.hist_h.bars.iter().enumerate() {
        let (Some(lo), Some(hi)) = (bar.lower, bar.upper) else { continue };
        if lo >= extent || bar.total == 0 {
            continue;
        }
        let (x, w) = (sx(lo), sx(hi) - sx(lo));
        let segments: Vec<(usize, String)> = if bar.stacks.is_empty() {
            vec![(bar.total, hue.clone())]
        } else {
            bar.stacks.iter().map(|s| (s.count, palette(h_stacks[s.value.as_str()]).to_string())).collect()
        };
        let mut y = h_top;
        for (count, fill) in segments {
            let len = count as f64 / h_max * HIST;
            let _ = writeln!(
                out,
                r#"<rect class="hist-h" data-bar="{i}" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                num(x),
                num(y),
                num(w),
                num(len)
            );
            y += len;
        }
    }

    // Vertical histogram right of the container, bars growing rightwards.
    let v_left = MARGIN + PLOT_WIDTH + GAP;
    let v_max = bx.hist_v.bars.iter().map(|b| b.total).max().unwrap_or(0).max(1) as f64;
    let v_stacks = stack_ranks(&bx.hist_v);
    let n_bars = bx.hist_v.bars.len().max(1) as f64;
    for (i, bar) in bx.hist_v.bars.iter().enumerate() {
        if bar.total == 0 {
            continue;
        }
        let (y, h) = match (bar.lower, bar.upper) {
            (Some(lo), Some(hi)) => {
                let span = if v_hi > v_lo { v_hi - v_lo } else { 1.0 };
                (top + (lo - v_lo) / span * height, (hi - lo) / span * height)
            }
            _ => (top + i as f64 / n_bars * height, height / n_bars),
        };
        let segments: Vec<(usize, String)> = if bar.stacks.is_empty() {
            vec![(bar.total, hue.clone())]
        } else {
            bar.stacks.iter().map(|s| (s.count, palette(v_stacks[s.value.as_str()]).to_string())).collect()
        };
        let mut x = v_left;
        for (count, fill) in segments {
            let len = count as f64 / v_max * HIST;
            let _ = writeln!(
                out,
                r#"<rect class="hist-v" data-bar="{i}" x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
                num(x),
                num(y),
                num(len),
                num(h)
            );
            x += len;
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventbox::{build_eventbox, EventBoxConfig};
    use crate::ingest::{generate_synthetic, SyntheticConfig};
    use crate::model::SelectionSet;

    fn attr(line: &str, name: &str) -> f64 {
        let key = format!(" {name}=\"");
        let start = line.find(&key).unwrap() + key.len();
        let end = start + line[start..].find('"').unwrap();
        line[start..end].parse().unwrap()
    }

    fn boxed(config: EventBoxConfig) -> EventBox {
        let d = generate_synthetic(&SyntheticConfig::new(300, 11)).unwrap();
        build_eventbox(&d, None, &SelectionSet::all(&d), "wait", &config).unwrap()
    }

    #[test]
    fn quartile_lines_are_affine() {
        let bx = boxed(EventBoxConfig::default());
        let svg = render_svg(&bx, &SvgStyle::default());
        let s = &bx.summary;
        let mut seen = 0;
        for line in svg.lines().filter(|l| l.contains("class=\"quartile\"")) {
            let stat = ["min", "q1", "q2", "q3", "max"].iter().position(|n| line.contains(&format!("data-stat=\"{n}\""))).unwrap();
            let v = [s.min, s.q1, s.q2, s.q3, s.max][stat];
            let expected = MARGIN + v * PLOT_WIDTH / bx.container.width;
            assert!((attr(line, "x1") - expected).abs() <= 0.005 + 1e-9);
            seen += 1;
        }
        assert_eq!(seen, 5);
        assert_eq!(svg.matches("class=\"point\"").count(), bx.n);
    }

    #[test]
    fn hidden_outliers_truncate_at_upper_fence() {
        let shown = boxed(EventBoxConfig::default());
        assert!(shown.summary.max > shown.fences.upper, "fixture needs upper outliers");
        let bx = boxed(EventBoxConfig { show_outliers: false, ..Default::default() });
        assert_eq!(bx.container.width, shown.container.width);
        let svg = render_svg(&bx, &SvgStyle::default());
        assert!(!svg.contains("data-stat=\"max\""));
        assert!(!svg.contains("beyond-fence"));
        let right = MARGIN + PLOT_WIDTH + 1e-9;
        for line in svg.lines().filter(|l| l.contains("class=\"point\"")) {
            assert!(attr(line, "cx") <= right);
        }
        let inliers = bx.points.iter().filter(|p| !bx.is_outlier(p.occurrence_id)).count();
        assert_eq!(svg.matches("class=\"point\"").count(), inliers);
        assert!(render_svg(&shown, &SvgStyle::default()).contains("beyond-fence"));
    }

    #[test]
    fn coincident_quartiles() {
        let d = crate::transforms::align::tests::dataset(&[&["a"], &["a"], &["a"]]);
        let bx = build_eventbox(&d, None, &SelectionSet::all(&d), "a", &EventBoxConfig::default()).unwrap();
        let svg = render_svg(&bx, &SvgStyle::default());
        let xs: Vec<f64> = svg.lines().filter(|l| l.contains("class=\"quartile\"")).map(|l| attr(l, "x1")).collect();
        assert_eq!(xs.len(), 5);
        assert!(xs.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(render_svg(&bx, &SvgStyle::default()), svg);
    }

    #[test]
    fn breakdown_colours_follow_weekday_order() {
        let bx = boxed(EventBoxConfig { b: Some("day_of_week".into()), ..Default::default() });
        let svg = render_svg(&bx, &SvgStyle::default());
        let mon = bx.points.iter().find(|p| p.color.as_deref() == Some("Mon")).unwrap();
        let line = svg.lines().find(|l| l.contains(&format!("data-id=\"{}\"", mon.occurrence_id.0))).unwrap();
        assert!(line.contains(CATEGORY_PALETTE[0]));
    }
}
