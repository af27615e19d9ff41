use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Boxplot statistics of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber<T> {
    pub min: T,
    pub q1: T,
    pub q2: T,
    pub q3: T,
    pub max: T,
    pub n: usize,
}

impl<T: Real> FiveNumber<T> {
    pub fn iqr(&self) -> T {
        self.q3 - self.q1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fences<T> {
    pub lower: T,
    pub upper: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TukeyPartition<I, T> {
    pub inliers: Vec<I>,
    pub outliers: Vec<I>,
    pub fences: Fences<T>,
    pub summary: FiveNumber<T>,
}

/// Quantile `q` of an ascending slice by linear interpolation at position
/// `q * (n - 1)`.
pub fn quantile_sorted<T: Real>(sorted: &[T], q: T) -> T {
    let n = sorted.len();
    debug_assert!(n > 0);
    let pos = q * T::from_count(n - 1);
    let lo = pos.floor();
    let i = lo.to_usize().unwrap_or(0).min(n - 1);
    if i + 1 >= n {
        return sorted[n - 1];
    }
    let frac = pos - lo;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

pub(crate) fn sorted_finite<T: Real>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no values to summarise".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in sample".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(v)
}

pub fn quartiles<T: Real>(values: &[T]) -> Result<FiveNumber<T>> {
    let v = sorted_finite(values)?;
    Ok(five_number_sorted(&v))
}

pub(crate) fn five_number_sorted<T: Real>(v: &[T]) -> FiveNumber<T> {
    FiveNumber {
        min: v[0],
        q1: quantile_sorted(v, T::lit(0.25)),
        q2: quantile_sorted(v, T::lit(0.5)),
        q3: quantile_sorted(v, T::lit(0.75)),
        max: v[v.len() - 1],
        n: v.len(),
    }
}

/// Splits `values` by Tukey fences `[q1 - w*iqr, q3 + w*iqr]` computed from
/// all values. Values exactly on a fence are inliers. Output ids keep input
/// order.
pub fn tukey_partition<I: Clone, T: Real>(values: &[(I, T)], w: T) -> Result<TukeyPartition<I, T>> {
    if !(w > T::zero()) {
        return Err(Error::Config(format!("whisker factor must be positive, got {w}")));
    }
    let raw: Vec<T> = values.iter().map(|(_, v)| *v).collect();
    let summary = quartiles(&raw)?;
    let iqr = summary.iqr();
    let fences = Fences { lower: summary.q1 - w * iqr, upper: summary.q3 + w * iqr };
    let (mut inliers, mut outliers) = (Vec::new(), Vec::new());
    for (id, v) in values {
        if *v < fences.lower || *v > fences.upper {
            outliers.push(id.clone());
        } else {
            inliers.push(id.clone());
        }
    }
    Ok(TukeyPartition { inliers, outliers, fences, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five(v: &[f64]) -> [f64; 5] {
        let s = quartiles(v).unwrap();
        [s.min, s.q1, s.q2, s.q3, s.max]
    }

    #[test]
    fn examples() {
        assert_eq!(five(&[1.0, 2.0, 3.0, 4.0, 5.0]), [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(five(&[4.0, 1.0, 3.0, 2.0]), [1.0, 1.75, 2.5, 3.25, 4.0]);
        assert_eq!(five(&[5.0]), [5.0; 5]);
        assert!(matches!(quartiles::<f64>(&[]), Err(Error::EmptyInput(_))));
        assert!(matches!(quartiles(&[1.0, f64::NAN]), Err(Error::Numeric(_))));
    }

    #[test]
    fn f32_instantiation() {
        let s = quartiles(&[1.0f32, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.q1, 1.75f32);
    }

    #[test]
    fn tukey_examples() {
        let v: Vec<(u32, f64)> = [1.0, 2.0, 3.0, 4.0, 100.0].iter().enumerate().map(|(i, x)| (i as u32, *x)).collect();
        let p = tukey_partition(&v, 1.5).unwrap();
        assert_eq!(p.fences, Fences { lower: -1.0, upper: 7.0 });
        assert_eq!(p.outliers, vec![4]);

        let flat: Vec<(u32, f64)> = (0..4).map(|i| (i, 3.0)).collect();
        let p = tukey_partition(&flat, 0.1).unwrap();
        assert_eq!(p.fences, Fences { lower: 3.0, upper: 3.0 });
        assert!(p.outliers.is_empty());
        assert!(matches!(tukey_partition(&flat, 0.0), Err(Error::Config(_))));
    }
}
