//! Periodic cubic interpolation on the circle.
//!
//! Used for user-supplied circle maps and for tabulated vertical metrics.
//! The interpolant is twice continuously differentiable, not smooth.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    moments: Vec<f64>,
}

impl PeriodicSpline {
    /// Interpolates `(x, y)` pairs with period 2π. Knots must be strictly
    /// increasing and span less than one period.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        let n = points.len();
        if n < 3 {
            return Err(Error::invalid("knots", "need at least 3 knots"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("knots", "non-finite entry"));
        }
        let knots: Vec<f64> = points.iter().map(|p| p.0).collect();
        let values: Vec<f64> = points.iter().map(|p| p.1).collect();
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("knots", "knot angles must be strictly increasing"));
        }
        if knots[n - 1] - knots[0] >= TAU {
            return Err(Error::invalid("knots", "knot angles must span less than 2π"));
        }
        let h = |i: usize| -> f64 {
            if i + 1 < n {
                knots[i + 1] - knots[i]
            } else {
                knots[0] + TAU - knots[n - 1]
            }
        };
        let slope = |i: usize| (values[(i + 1) % n] - values[i]) / h(i);

        // cyclic tridiagonal system for the moments, solved densely
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            let prev = (i + n - 1) % n;
            let next = (i + 1) % n;
            a[i][prev] += h(prev);
            a[i][i] += 2.0 * (h(prev) + h(i));
            a[i][next] += h(i);
            a[i][n] = 6.0 * (slope(i) - slope(prev));
        }
        let moments = solve_dense(a).ok_or_else(|| Error::invalid("knots", "singular spline system"))?;
        Ok(PeriodicSpline {
            knots,
            values,
            moments,
        })
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots.iter().copied().zip(self.values.iter().copied())
    }

    /// Value, first and second derivative at `x` (any real; reduced mod 2π).
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.knots.len();
        let x0 = self.knots[0];
        let xr = x0 + (x - x0).rem_euclid(TAU);
        let i = self.knots.partition_point(|&k| k <= xr).saturating_sub(1);
        let (xa, xb) = if i + 1 < n {
            (self.knots[i], self.knots[i + 1])
        } else {
            (self.knots[i], x0 + TAU)
        };
        let j = (i + 1) % n;
        let (ya, yb) = (self.values[i], self.values[j]);
        let (ma, mb) = (self.moments[i], self.moments[j]);
        let h = xb - xa;
        let a = (xb - xr) / h;
        let b = (xr - xa) / h;
        let value = a * ya + b * yb + ((a * a * a - a) * ma + (b * b * b - b) * mb) * h * h / 6.0;
        let d1 = (yb - ya) / h - (3.0 * a * a - 1.0) / 6.0 * h * ma + (3.0 * b * b - 1.0) / 6.0 * h * mb;
        let d2 = a * ma + b * mb;
        (value, d1, d2)
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..=n {
                    a[row][k] -= factor * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - tail) / a[row][row];
    }
    Some(x)
}
