use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::OccurrenceId;

fn on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    cross == 0.0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// Even-odd rule; points on an edge or vertex count as inside.
pub fn point_in_polygon(p: (f64, f64), polygon: &[(f64, f64)]) -> bool {
    let n = polygon.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[(i + 1) % n]);
        if on_segment(p, a, b) {
            return true;
        }
        if (a.1 > p.1) != (b.1 > p.1) {
            let x = a.0 + (p.1 - a.1) / (b.1 - a.1) * (b.0 - a.0);
            if p.0 < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Ids of the points inside the closed polygon.
pub fn lasso_select(points: &[(OccurrenceId, f64, f64)], polygon: &[(f64, f64)]) -> Result<BTreeSet<OccurrenceId>> {
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for v in polygon {
        if !distinct.contains(v) {
            distinct.push(*v);
        }
    }
    if distinct.len() < 3 {
        return Err(Error::Config("lasso polygon needs at least 3 distinct vertices".into()));
    }
    Ok(points.iter().filter(|(_, x, y)| point_in_polygon((*x, *y), polygon)).map(|(id, _, _)| *id).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];

    #[test]
    fn unit_square() {
        assert!(point_in_polygon((0.5, 0.5), &SQUARE));
        assert!(!point_in_polygon((2.0, 2.0), &SQUARE));
        assert!(point_in_polygon((1.0, 0.5), &SQUARE));
        assert!(point_in_polygon((0.0, 0.0), &SQUARE));
    }

    #[test]
    fn self_intersecting_uses_even_odd() {
        // Pentagram: the central pentagon is crossed twice, so it is outside.
        let star: Vec<(f64, f64)> = (0..5)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 + (k * 2) as f64 * 2.0 * std::f64::consts::PI / 5.0;
                (a.cos(), a.sin())
            })
            .collect();
        assert!(!point_in_polygon((0.0, 0.0), &star));
        assert!(point_in_polygon((0.0, 0.8), &star));
    }

    #[test]
    fn degenerate_polygon() {
        let pts = [(OccurrenceId(1), 0.5, 0.5)];
        assert!(lasso_select(&pts, &[(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)]).is_err());
        assert_eq!(lasso_select(&pts, &SQUARE).unwrap().len(), 1);
    }
}
