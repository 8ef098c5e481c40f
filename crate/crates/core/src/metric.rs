//! Metric `dt² + φ(t, θ)² dθ²` on each of the two disk charts.
//!
//! The warp blends the flat polar warp `t` near the center into a radially
//! constant vertical scale `ψ(θ)` near the gluing circle:
//! `φ = (1 − s(t))·t + s(t)·ψ(θ)`, with `s` a smooth step that is 0 on
//! `[0, t0]` and 1 on `[t1, 1]`. The radial component is 1 everywhere, so
//! radial lines are unit-speed geodesics meeting every leaf orthogonally.
//!
//! Chart 2 carries `ψ₂` (default 1); chart 1 carries the pullback
//! `ψ₁ = (ψ₂ ∘ F)·F'`, which makes the two plateaus agree along the gluing.

use std::f64::consts::TAU;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::circle_map::CircleDiffeo;
use crate::error::{Error, Result};
use crate::smooth::SmoothStep;
use crate::spline::PeriodicSpline;

pub const DEFAULT_T0: f64 = 0.25;
pub const DEFAULT_T1: f64 = 0.75;
const PSI_CHECK_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Chart {
    One,
    Two,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::One => Chart::Two,
            Chart::Two => Chart::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Chart::One => 0,
            Chart::Two => 1,
        }
    }
}

impl From<Chart> for u8 {
    fn from(c: Chart) -> u8 {
        c.index() as u8 + 1
    }
}

impl TryFrom<u8> for Chart {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Chart::One),
            2 => Ok(Chart::Two),
            other => Err(format!("chart must be 1 or 2, got {other}")),
        }
    }
}

impl std::fmt::Display for Chart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// Vertical scale `ψ(θ)` on the plateau near the gluing circle.
#[derive(Debug, Clone, PartialEq)]
pub enum VerticalScale {
    Constant(f64),
    /// Periodic cubic interpolation of `(θ, ψ)` samples.
    Table(PeriodicSpline),
    /// `(ψ ∘ F)·F'`.
    Pullback {
        base: Box<VerticalScale>,
        f: CircleDiffeo,
    },
}

impl VerticalScale {
    /// `(ψ(θ), ψ'(θ))`.
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        match self {
            VerticalScale::Constant(c) => (*c, 0.0),
            VerticalScale::Table(spline) => {
                let (v, d, _) = spline.eval(theta);
                (v, d)
            }
            VerticalScale::Pullback { base, f } => {
                let (b, db) = base.eval(f.lift(theta));
                let df = f.lift_derivative(theta);
                let d2f = f.lift_second_derivative(theta);
                (b * df, db * df * df + b * d2f)
            }
        }
    }

    pub fn min_on_grid(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| self.eval(i as f64 / n as f64 * TAU).0)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpProfile {
    t0: f64,
    t1: f64,
    psi: VerticalScale,
    psi_min: f64,
    step: SmoothStep,
}

impl WarpProfile {
    pub fn new(t0: f64, t1: f64, psi: VerticalScale) -> Result<Self> {
        if !(0.0 < t0 && t0 < t1 && t1 < 1.0) {
            return Err(Error::invalid(
                "t0/t1",
                format!("need 0 < t0 < t1 < 1, got t0 = {t0}, t1 = {t1}"),
            ));
        }
        let psi_min = psi.min_on_grid(PSI_CHECK_GRID);
        if !(psi_min > 0.0) {
            return Err(Error::invalid("psi", format!("vertical scale must be positive, min {psi_min}")));
        }
        Ok(WarpProfile {
            t0,
            t1,
            psi,
            psi_min,
            step: SmoothStep::new(t0, t1),
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn psi(&self) -> &VerticalScale {
        &self.psi
    }

    pub fn psi_min(&self) -> f64 {
        self.psi_min
    }

    /// `(φ, ∂φ/∂t, ∂φ/∂θ)`. Exactly `(t, 1, 0)` for `t ≤ t0`, and radially
    /// constant for `t ≥ t1`. Defined for every real `t`.
    pub fn jet(&self, t: f64, theta: f64) -> (f64, f64, f64) {
        let (s, ds) = self.step.value_and_derivative(t);
        if s == 0.0 {
            return (t, 1.0, 0.0);
        }
        let (psi, dpsi) = self.psi.eval(theta);
        if s == 1.0 {
            return (psi, 0.0, dpsi);
        }
        ((1.0 - s) * t + s * psi, (1.0 - s) + ds * (psi - t), s * dpsi)
    }
}

/// Components of the metric at a point; `g_tt = 1` and `g_tθ = 0` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSample {
    pub chart: Chart,
    pub g_tt: f64,
    pub g_ttheta: f64,
    pub g_thetatheta: f64,
    pub phi: f64,
    pub phi_t: f64,
    pub phi_theta: f64,
}

/// The non-vanishing Christoffel symbols of `dt² + φ² dθ²` (up to the
/// symmetry `Γ^θ_tθ = Γ^θ_θt`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Christoffel {
    /// `Γ^t_θθ = −φ φ_t`
    pub t_thetatheta: f64,
    /// `Γ^θ_tθ = φ_t / φ`
    pub theta_ttheta: f64,
    /// `Γ^θ_θθ = φ_θ / φ`
    pub theta_thetatheta: f64,
}

impl Christoffel {
    /// `Γ^t_tt`, `Γ^t_tθ` and `Γ^θ_tt` vanish identically because the
    /// radial component is constant and orthogonal to the leaves.
    pub const T_TT: f64 = 0.0;
    pub const T_TTHETA: f64 = 0.0;
    pub const THETA_TT: f64 = 0.0;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GluedMetric {
    f: CircleDiffeo,
    profiles: [WarpProfile; 2],
}

impl GluedMetric {
    /// Default convention `ψ₂ ≡ 1`, `ψ₁ = F'`.
    pub fn new(f: CircleDiffeo, t0: f64, t1: f64) -> Result<Self> {
        Self::with_psi2(f, t0, t1, VerticalScale::Constant(1.0))
    }

    /// Chart-2 scale `psi2`; the chart-1 scale is derived from it.
    pub fn with_psi2(f: CircleDiffeo, t0: f64, t1: f64, psi2: VerticalScale) -> Result<Self> {
        let psi1 = VerticalScale::Pullback {
            base: Box::new(psi2.clone()),
            f: f.clone(),
        };
        Ok(GluedMetric {
            profiles: [WarpProfile::new(t0, t1, psi1)?, WarpProfile::new(t0, t1, psi2)?],
            f,
        })
    }

    /// Replaces the derived chart-1 scale. The result is generally not a
    /// smooth metric on the glued sphere; used as a negative control.
    pub fn with_psi1_override(mut self, psi1: VerticalScale) -> Result<Self> {
        let p = &self.profiles[0];
        self.profiles[0] = WarpProfile::new(p.t0, p.t1, psi1)?;
        Ok(self)
    }

    pub fn diffeo(&self) -> &CircleDiffeo {
        &self.f
    }

    pub fn profile(&self, chart: Chart) -> &WarpProfile {
        &self.profiles[chart.index()]
    }

    pub fn warp(&self, chart: Chart, t: f64, theta: Angle) -> f64 {
        self.profile(chart).jet(t, theta.radians()).0
    }

    /// `(φ, φ_t, φ_θ)` without the center check.
    pub fn warp_jet(&self, chart: Chart, t: f64, theta: f64) -> (f64, f64, f64) {
        self.profile(chart).jet(t, theta)
    }

    pub fn metric_components(&self, chart: Chart, t: f64, theta: Angle) -> Result<MetricSample> {
        if !(t > 0.0) {
            return Err(Error::DegenerateAtCenter { t });
        }
        let (phi, phi_t, phi_theta) = self.warp_jet(chart, t, theta.radians());
        Ok(MetricSample {
            chart,
            g_tt: 1.0,
            g_ttheta: 0.0,
            g_thetatheta: phi * phi,
            phi,
            phi_t,
            phi_theta,
        })
    }

    pub fn christoffel(&self, chart: Chart, t: f64, theta: Angle) -> Result<Christoffel> {
        let m = self.metric_components(chart, t, theta)?;
        Ok(Christoffel {
            t_thetatheta: -m.phi * m.phi_t,
            theta_ttheta: m.phi_t / m.phi,
            theta_thetatheta: m.phi_theta / m.phi,
        })
    }

    /// Largest mismatch `|φ₁(t, θ) − φ₂(t, F(θ))·F'(θ)|` over a plateau grid,
    /// pairing the points at equal distance `1 − t` from the gluing circle
    /// on either side.
    pub fn gluing_residual(&self, n_theta: usize, n_t: usize) -> f64 {
        let t1 = self.profiles[0].t1.max(self.profiles[1].t1);
        let mut worst: f64 = 0.0;
        for j in 0..n_t {
            let t = if n_t == 1 {
                1.0
            } else {
                t1 + (1.0 - t1) * j as f64 / (n_t - 1) as f64
            };
            for i in 0..n_theta {
                let theta = i as f64 / n_theta as f64 * TAU;
                let phi1 = self.warp_jet(Chart::One, t, theta).0;
                let phi2 = self.warp_jet(Chart::Two, t, self.f.lift(theta)).0;
                worst = worst.max((phi1 - phi2 * self.f.lift_derivative(theta)).abs());
            }
        }
        worst
    }

    /// Sampled warp for plotting: `chart,t,theta,phi,phi_t,phi_theta` with
    /// `t = j/n_t`, `j = 1..=n_t`.
    pub fn write_grid_csv<W: Write>(&self, mut w: W, n_t: usize, n_theta: usize) -> io::Result<()> {
        writeln!(w, "chart,t,theta,phi,phi_t,phi_theta")?;
        for chart in [Chart::One, Chart::Two] {
            for j in 1..=n_t {
                let t = j as f64 / n_t as f64;
                for i in 0..n_theta {
                    let theta = Angle::grid(i, n_theta);
                    let (phi, phi_t, phi_theta) = self.warp_jet(chart, t, theta.radians());
                    writeln!(w, "{chart},{t},{theta},{phi},{phi_t},{phi_theta}")?;
                }
            }
        }
        Ok(())
    }
}
