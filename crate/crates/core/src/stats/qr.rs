//! Householder QR least squares that drops aliased columns in order.

use crate::num::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct QrFit<T> {
    /// Indices of the columns kept, in input order.
    pub kept: Vec<usize>,
    /// Columns found to be linear combinations of earlier ones.
    pub dropped: Vec<usize>,
    /// `Q^T y`; the first `kept.len()` entries belong to the kept columns.
    pub effects: Vec<T>,
    /// Coefficients of the kept columns.
    pub coefficients: Vec<T>,
    /// Row-major upper triangular factor over the kept columns.
    pub r: Vec<Vec<T>>,
}

impl<T: Real> QrFit<T> {
    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    pub fn rss(&self) -> T {
        self.effects[self.rank()..].iter().fold(T::zero(), |s, e| s + *e * *e)
    }

    /// Diagonal of `(R^T R)^-1`, the unscaled coefficient variances.
    pub fn unscaled_variances(&self) -> Vec<T> {
        let k = self.rank();
        // Invert R column by column by back substitution.
        let mut inv = vec![vec![T::zero(); k]; k];
        for j in 0..k {
            inv[j][j] = T::one() / self.r[j][j];
            for i in (0..j).rev() {
                let mut s = T::zero();
                for m in i + 1..=j {
                    s = s + self.r[i][m] * inv[m][j];
                }
                inv[i][j] = -s / self.r[i][i];
            }
        }
        (0..k).map(|i| inv[i][i..].iter().fold(T::zero(), |s, v| s + *v * *v)).collect()
    }
}

/// Least squares fit of `y` on the given columns (each of length `y.len()`).
///
/// A column whose component orthogonal to the kept columns has norm below
/// `sqrt(eps)` times its own norm is dropped.
pub fn qr_least_squares<T: Real>(columns: &[Vec<T>], y: &[T]) -> QrFit<T> {
    let n = y.len();
    let tol = T::epsilon().sqrt();
    let mut reflectors: Vec<(usize, Vec<T>, T)> = Vec::new();
    let mut r_cols: Vec<Vec<T>> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();

    let apply = |reflectors: &[(usize, Vec<T>, T)], v: &mut [T]| {
        for (k, u, beta) in reflectors {
            let dot = u.iter().zip(&v[*k..]).fold(T::zero(), |s, (a, b)| s + *a * *b);
            let f = *beta * dot;
            for (vi, ui) in v[*k..].iter_mut().zip(u) {
                *vi = *vi - f * *ui;
            }
        }
    };

    for (j, col) in columns.iter().enumerate() {
        assert_eq!(col.len(), n, "column {j} length");
        let k = kept.len();
        if k >= n {
            dropped.push(j);
            continue;
        }
        let norm0 = col.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt();
        let mut v = col.clone();
        apply(&reflectors, &mut v);
        let tail = v[k..].iter().fold(T::zero(), |s, x| s + *x * *x).sqrt();
        if norm0 == T::zero() || tail <= tol * norm0 {
            dropped.push(j);
            continue;
        }
        let alpha = if v[k] > T::zero() { -tail } else { tail };
        let mut u: Vec<T> = v[k..].to_vec();
        u[0] = u[0] - alpha;
        let unorm2 = u.iter().fold(T::zero(), |s, x| s + *x * *x);
        let beta = T::lit(2.0) / unorm2;
        v[k] = alpha;
        for x in &mut v[k + 1..] {
            *x = T::zero();
        }
        r_cols.push(v[..=k].to_vec());
        reflectors.push((k, u, beta));
        kept.push(j);
    }

    let mut effects = y.to_vec();
    apply(&reflectors, &mut effects);

    let rank = kept.len();
    let mut r = vec![vec![T::zero(); rank]; rank];
    for (c, col) in r_cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            r[i][c] = *v;
        }
    }
    let mut coefficients = vec![T::zero(); rank];
    for i in (0..rank).rev() {
        let mut s = effects[i];
        for m in i + 1..rank {
            s = s - r[i][m] * coefficients[m];
        }
        coefficients[i] = s / r[i][i];
    }
    QrFit { kept, dropped, effects, coefficients, r }
}
