//! Summary statistics and least-squares fits.

use serde::{Deserialize, Serialize};

/// Extremes, mean and count of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

impl Default for Stats {
    fn default() -> Self {
        Self { min: f64::INFINITY, max: f64::NEG_INFINITY, mean: 0.0, count: 0 }
    }
}

// NaN propagates so that a broken sample can never pass a threshold.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Self::default();
        let mut sum = 0.0;
        for v in values {
            s.max = nan_max(s.max, v);
            s.min = nan_min(s.min, v);
            sum += v;
            s.count += 1;
        }
        if s.count > 0 {
            s.mean = sum / s.count as f64;
        }
        s
    }

    pub fn merge(self, other: Self) -> Self {
        let count = self.count + other.count;
        let mean = if count == 0 { 0.0 } else { (self.mean * self.count as f64 + other.mean * other.count as f64) / count as f64 };
        Self { min: nan_min(self.min, other.min), max: nan_max(self.max, other.max), mean, count }
    }
}

/// Ordinary least squares `y = sum coef_j * basis_j(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    /// Coefficients in the order of the basis.
    pub coef: Vec<f64>,
    pub r2: f64,
    pub points: usize,
}

impl Fit {
    /// `y = coef[0] + coef[1] x`.
    pub fn linear(xs: &[f64], ys: &[f64]) -> Self {
        Self::least_squares(xs, ys, &[|_| 1.0, |x| x])
    }

    /// `y = coef[0] + coef[1] x + coef[2] x^2`.
    pub fn quadratic(xs: &[f64], ys: &[f64]) -> Self {
        Self::least_squares(xs, ys, &[|_| 1.0, |x| x, |x| x * x])
    }

    pub fn slope(&self) -> f64 {
        self.coef[1]
    }

    /// Normal equations solved by Gaussian elimination with partial pivoting.
    pub fn least_squares(xs: &[f64], ys: &[f64], basis: &[fn(f64) -> f64]) -> Self {
        let m = basis.len();
        let mut a = vec![vec![0.0; m + 1]; m];
        for (&x, &y) in xs.iter().zip(ys) {
            let phi: Vec<f64> = basis.iter().map(|b| b(x)).collect();
            for i in 0..m {
                for j in 0..m {
                    a[i][j] += phi[i] * phi[j];
                }
                a[i][m] += phi[i] * y;
            }
        }
        for col in 0..m {
            let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap_or(col);
            a.swap(col, piv);
            for row in 0..m {
                if row != col && a[col][col] != 0.0 {
                    let f = a[row][col] / a[col][col];
                    for c in col..=m {
                        a[row][c] -= f * a[col][c];
                    }
                }
            }
        }
        let coef: Vec<f64> = (0..m).map(|i| a[i][m] / a[i][i]).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let (mut ss_res, mut ss_tot) = (0.0, 0.0);
        for (&x, &y) in xs.iter().zip(ys) {
            let pred: f64 = basis.iter().zip(&coef).map(|(b, c)| c * b(x)).sum();
            ss_res += (y - pred) * (y - pred);
            ss_tot += (y - mean) * (y - mean);
        }
        let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
        Self { coef, r2, points: xs.len() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lines_and_parabolas() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x).collect();
        let f = Fit::linear(&xs, &ys);
        assert!((f.coef[0] - 3.0).abs() < 1e-12 && (f.slope() + 2.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 0.5 * x + 0.25 * x * x).collect();
        let q = Fit::quadratic(&xs, &ys);
        assert!((q.coef[2] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn stats_merge_and_nan() {
        let a = Stats::of([1.0, 3.0]);
        let b = Stats::of([5.0]);
        let m = a.merge(b);
        assert_eq!(m.max, 5.0);
        assert_eq!(m.min, 1.0);
        assert_eq!(m.count, 3);
        assert!((m.mean - 3.0).abs() < 1e-15);
        assert!(Stats::of([1.0, f64::NAN]).max.is_nan());
    }
}
