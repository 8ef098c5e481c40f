//! Orientation-preserving diffeomorphisms of the circle, stored as lifts
//! `F: ℝ → ℝ` with `F(x + 2π) = F(x) + 2π` and `F' > 0`.

use std::f64::consts::{PI, TAU};

use crate::angle::{normalize, Angle};
use crate::error::{Error, Result};
use crate::smooth::unit_bump;
use crate::spline::PeriodicSpline;

/// Points used to certify monotonicity at construction.
const MONOTONICITY_GRID: usize = 20_000;
/// Bisection stops once the bracket is this narrow; Newton polishes the rest.
const BISECTION_WIDTH: f64 = 1e-10;
const NEWTON_POLISHES: usize = 2;
const MAX_ITERATIONS: usize = 200;
/// Required `|F(x) − y|` for an inverse.
pub const INVERSE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum DiffeoKind {
    Identity,
    /// `F(x) = x + angle`.
    Rotation { angle: f64 },
    /// `F(x) = x + amplitude·β(x)` with β a smooth bump of peak 1 supported
    /// on the open arc `(support_lo, support_hi)`.
    Bump {
        amplitude: f64,
        support_lo: f64,
        support_hi: f64,
    },
    /// `F(x) = x + amplitude·sin(mode·x + phase)`.
    Harmonic { amplitude: f64, mode: u32, phase: f64 },
    /// Periodic cubic spline through user knots `(θ, F(θ))`. Only C².
    Spline(PeriodicSpline),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleDiffeo {
    kind: DiffeoKind,
    min_slope: f64,
}

impl CircleDiffeo {
    pub fn identity() -> Self {
        CircleDiffeo {
            kind: DiffeoKind::Identity,
            min_slope: 1.0,
        }
    }

    pub fn rotation(angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::invalid("angle", "must be finite"));
        }
        Ok(CircleDiffeo {
            kind: DiffeoKind::Rotation {
                angle: normalize(angle),
            },
            min_slope: 1.0,
        })
    }

    /// Identity on the closed semicircle `[0, π]`, bumped on `(π, 2π)`.
    pub fn semicircle_bump(amplitude: f64) -> Result<Self> {
        Self::bump(amplitude, PI, TAU)
    }

    /// Bump supported on the arc from `lo` counterclockwise to `hi`.
    pub fn bump(amplitude: f64, lo: f64, hi: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo || hi - lo > TAU {
            return Err(Error::invalid(
                "support",
                format!("need support_lo < support_hi <= support_lo + 2π, got ({lo}, {hi})"),
            ));
        }
        Self::checked(DiffeoKind::Bump {
            amplitude,
            support_lo: lo,
            support_hi: hi,
        })
    }

    pub fn harmonic(amplitude: f64, mode: u32, phase: f64) -> Result<Self> {
        if !amplitude.is_finite() || !phase.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        if mode == 0 {
            return Err(Error::invalid("mode", "must be at least 1"));
        }
        Self::checked(DiffeoKind::Harmonic {
            amplitude,
            mode,
            phase,
        })
    }

    /// Spline through `(θ, F(θ))` knots; the lift values must increase and
    /// stay within one turn of the first.
    pub fn spline(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.windows(2).any(|w| w[1].1 <= w[0].1) {
            return Err(Error::invalid("knots", "lift values must be strictly increasing"));
        }
        if let (Some(first), Some(last)) = (knots.first(), knots.last()) {
            if last.1 >= first.1 + TAU {
                return Err(Error::invalid("knots", "lift values must span less than 2π"));
            }
        }
        let displacement: Vec<(f64, f64)> = knots.iter().map(|&(x, y)| (x, y - x)).collect();
        Self::checked(DiffeoKind::Spline(PeriodicSpline::new(&displacement)?))
    }

    fn checked(kind: DiffeoKind) -> Result<Self> {
        let mut f = CircleDiffeo {
            kind,
            min_slope: 0.0,
        };
        let (min_slope, at) = (0..MONOTONICITY_GRID)
            .map(|i| {
                let x = i as f64 / MONOTONICITY_GRID as f64 * TAU;
                (f.lift_derivative(x), x)
            })
            .fold((f64::INFINITY, 0.0), |acc, v| if v.0 < acc.0 { v } else { acc });
        if !(min_slope > 0.0) {
            return Err(Error::MonotonicityViolation { min_slope, at });
        }
        f.min_slope = min_slope;
        Ok(f)
    }

    pub fn kind(&self) -> &DiffeoKind {
        &self.kind
    }

    /// Smallest `F'` seen on the construction grid.
    pub fn min_slope(&self) -> f64 {
        self.min_slope
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, DiffeoKind::Identity)
    }

    /// `F(x) − x` and its first two derivatives.
    fn displacement(&self, x: f64) -> (f64, f64, f64) {
        match &self.kind {
            DiffeoKind::Identity => (0.0, 0.0, 0.0),
            DiffeoKind::Rotation { angle } => (*angle, 0.0, 0.0),
            DiffeoKind::Bump {
                amplitude,
                support_lo,
                support_hi,
            } => {
                let width = support_hi - support_lo;
                let u = (x - support_lo).rem_euclid(TAU) / width;
                let (b, b1, b2) = unit_bump(u);
                (amplitude * b, amplitude * b1 / width, amplitude * b2 / (width * width))
            }
            DiffeoKind::Harmonic {
                amplitude,
                mode,
                phase,
            } => {
                let m = f64::from(*mode);
                let (s, c) = (m * x + phase).sin_cos();
                (amplitude * s, amplitude * m * c, -amplitude * m * m * s)
            }
            DiffeoKind::Spline(spline) => spline.eval(x),
        }
    }

    pub fn lift(&self, x: f64) -> f64 {
        x + self.displacement(x).0
    }

    pub fn lift_derivative(&self, x: f64) -> f64 {
        1.0 + self.displacement(x).1
    }

    pub fn lift_second_derivative(&self, x: f64) -> f64 {
        self.displacement(x).2
    }

    pub fn eval(&self, theta: Angle) -> Angle {
        Angle::new(self.lift(theta.radians()))
    }

    pub fn derivative(&self, theta: Angle) -> f64 {
        self.lift_derivative(theta.radians())
    }

    pub fn inverse(&self, y: Angle) -> Result<Angle> {
        self.inverse_lift(y.radians()).map(Angle::new)
    }

    /// Solves `F(x) = y` on the lift: bisection on a bracket, then Newton.
    pub fn inverse_lift(&self, y: f64) -> Result<f64> {
        match &self.kind {
            DiffeoKind::Identity => return Ok(y),
            DiffeoKind::Rotation { angle } => return Ok(y - angle),
            _ => {}
        }
        let residual = |x: f64| self.lift(x) - y;

        let (mut lo, mut hi) = (y, y);
        while residual(lo) > 0.0 {
            lo -= TAU;
        }
        while residual(hi) < 0.0 {
            hi += TAU;
        }

        let mut iterations = 0;
        while hi - lo > BISECTION_WIDTH {
            if iterations == MAX_ITERATIONS {
                return Err(Error::ConvergenceFailure {
                    target: y,
                    residual: residual(0.5 * (lo + hi)).abs(),
                    iterations,
                });
            }
            let mid = 0.5 * (lo + hi);
            if residual(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
        }

        let mut x = 0.5 * (lo + hi);
        for _ in 0..NEWTON_POLISHES {
            let r = residual(x);
            if r == 0.0 {
                break;
            }
            x = (x - r / self.lift_derivative(x)).clamp(lo, hi);
            iterations += 1;
        }
        let r = residual(x).abs();
        if r < INVERSE_TOLERANCE {
            Ok(x)
        } else {
            Err(Error::ConvergenceFailure {
                target: y,
                residual: r,
                iterations,
            })
        }
    }
}
