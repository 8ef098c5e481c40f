//! Points of the unit circle.
//!
//! Arithmetic happens on real lifts; an [`Angle`] is always the canonical
//! representative in `[0, 2π)`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

/// Reduces a real number to `[0, 2π)`.
pub fn normalize(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest arc length between two points, in `[0, π]`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(TAU);
    d.min(TAU - d)
}

/// Distance between the lines through the origin with directions `a` and `b`.
pub fn line_distance(a: f64, b: f64) -> f64 {
    circle_distance(a, b).min(circle_distance(a, b + PI))
}

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(x: f64) -> Self {
        Angle(normalize(x))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn antipode(self) -> Self {
        if self.0 < PI {
            Angle::new(self.0 + PI)
        } else {
            Angle::new(self.0 - PI)
        }
    }

    pub fn distance(self, other: Angle) -> f64 {
        circle_distance(self.0, other.0)
    }

    /// `i`-th of `n` equispaced angles starting at 0.
    ///
    /// Computed as `(i / n)·2π` so that `i / n = 1/2` gives π exactly.
    pub fn grid(i: usize, n: usize) -> Self {
        Angle::new(i as f64 / n as f64 * TAU)
    }
}

impl From<f64> for Angle {
    fn from(x: f64) -> Self {
        Angle::new(x)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Antipodal map `p ↦ −p` on the circle.
pub fn antipode(theta: Angle) -> Angle {
    theta.antipode()
}
