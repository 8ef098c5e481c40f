//! Infinitely smooth building blocks from `exp(−1/x)`.

/// `exp(−1/x)` for `x > 0`, zero otherwise, with its first two derivatives.
fn flat_exp(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let h = (-1.0 / x).exp();
    let x2 = x * x;
    let d1 = h / x2;
    let d2 = h * (1.0 - 2.0 * x) / (x2 * x2);
    (h, d1, d2)
}

/// Smooth step that is 0 on `(−∞, lo]`, 1 on `[hi, ∞)` and strictly
/// increasing in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothStep {
    lo: f64,
    hi: f64,
}

impl SmoothStep {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo < hi);
        SmoothStep { lo, hi }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.value_and_derivative(t).0
    }

    /// `(s(t), s'(t))`. Exactly `(0, 0)` below `lo` and `(1, 0)` above `hi`.
    pub fn value_and_derivative(&self, t: f64) -> (f64, f64) {
        if t <= self.lo {
            return (0.0, 0.0);
        }
        if t >= self.hi {
            return (1.0, 0.0);
        }
        let width = self.hi - self.lo;
        let x = (t - self.lo) / width;
        let (a, da, _) = flat_exp(x);
        let (b, db, _) = flat_exp(1.0 - x);
        let sum = a + b;
        let s = a / sum;
        let ds = (da * b + a * db) / (sum * sum);
        (s, ds / width)
    }
}

/// `exp(4 − 1/(u(1−u)))` on `0 < u < 1`, zero elsewhere; peak value 1 at `u = 1/2`.
///
/// Returns the value and the first two derivatives with respect to `u`.
pub fn unit_bump(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 || u >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let w = u * (1.0 - u);
    let b = (4.0 - 1.0 / w).exp();
    if b == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    // b' = b·g, g = (1 − 2u)/w²
    let g = (1.0 - 2.0 * u) / (w * w);
    let dg = (-2.0 * w - 2.0 * (1.0 - 2.0 * u).powi(2)) / (w * w * w);
    (b, b * g, b * (g * g + dg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_is_flat_outside_transition() {
        let s = SmoothStep::new(0.25, 0.75);
        assert_eq!(s.value_and_derivative(0.1), (0.0, 0.0));
        assert_eq!(s.value_and_derivative(0.25), (0.0, 0.0));
        assert_eq!(s.value_and_derivative(0.75), (1.0, 0.0));
        assert_eq!(s.value_and_derivative(1.3), (1.0, 0.0));
        assert!((s.value(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn step_matches_high_precision_reference() {
        // mpmath, 40 digits
        let (v, d) = SmoothStep::new(0.25, 0.75).value_and_derivative(0.4);
        assert!((v - 0.129_570_469_399_705_917_5).abs() < 1e-15);
        assert!((d - 2.966_600_383_599_208_987).abs() < 1e-13);
    }

    #[test]
    fn step_derivative_matches_finite_differences() {
        let s = SmoothStep::new(0.25, 0.75);
        let h = 1e-6;
        for i in 1..100 {
            let t = 0.25 + 0.5 * i as f64 / 100.0;
            let fd = (s.value(t + h) - s.value(t - h)) / (2.0 * h);
            assert!((fd - s.value_and_derivative(t).1).abs() < 1e-7, "t = {t}");
        }
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        let h = 1e-6;
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let (_, d1, d2) = unit_bump(u);
            let fd1 = (unit_bump(u + h).0 - unit_bump(u - h).0) / (2.0 * h);
            let fd2 = (unit_bump(u + h).1 - unit_bump(u - h).1) / (2.0 * h);
            assert!((fd1 - d1).abs() < 1e-6, "u = {u}");
            assert!((fd2 - d2).abs() < 1e-5, "u = {u}");
        }
        assert_eq!(unit_bump(0.5).0, 1.0);
        assert_eq!(unit_bump(0.5).1, 0.0);
    }
}
