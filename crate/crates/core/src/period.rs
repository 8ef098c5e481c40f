//! The transition map `T = −f⁻¹ ∘ (−f)` and periods of its points.
//!
//! A section leaving a center through the boundary point `p` closes iff
//! `Tᵏ(p) = p` for some `k`; the least such `k` is the period of `p`.
//! Numerically, closure means circle distance below `tol`, and a search
//! that fails up to `k_max` reports [`Period::None`] for that horizon
//! only, never aperiodicity.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::{circle_distance, Angle};
use crate::circle_map::CircleDiffeo;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_K_MAX: usize = 64;
/// Distances within this factor of `tol` make a classification fragile.
pub const FRAGILE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    Finite(usize),
    /// No closure found up to the searched horizon.
    None(usize),
}

impl Period {
    pub fn finite(self) -> Option<usize> {
        match self {
            Period::Finite(k) => Some(k),
            Period::None(_) => None,
        }
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Period::Finite(k) => write!(f, "period {k}"),
            Period::None(k_max) => write!(f, "no period up to {k_max}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMap {
    f: CircleDiffeo,
}

/// Result of a period search with its near-threshold diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodProbe {
    pub period: Period,
    pub fragile: bool,
    /// Smallest circle distance `d(Tʲθ, θ)` seen over the examined iterates.
    pub closest: f64,
}

impl TransitionMap {
    pub fn new(f: CircleDiffeo) -> Self {
        TransitionMap { f }
    }

    pub fn diffeo(&self) -> &CircleDiffeo {
        &self.f
    }

    /// `−f⁻¹(−f(θ))`.
    pub fn apply(&self, theta: Angle) -> Result<Angle> {
        let image = self.f.eval(theta).antipode();
        Ok(self.f.inverse(image)?.antipode())
    }

    /// Continuous lift `x ↦ F⁻¹(F(x) + π) − π` of [`apply`](Self::apply).
    pub fn apply_lift(&self, x: f64) -> Result<f64> {
        Ok(self.f.inverse_lift(self.f.lift(x) + PI)? - PI)
    }

    /// `θ, Tθ, …, Tⁿθ`.
    pub fn orbit(&self, theta: Angle, n: usize) -> Result<Vec<Angle>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut x = theta;
        out.push(x);
        for _ in 0..n {
            x = self.apply(x)?;
            out.push(x);
        }
        Ok(out)
    }

    pub fn period_of(&self, theta: Angle, k_max: usize, tol: f64) -> Result<Period> {
        Ok(self.probe(theta, k_max, tol)?.period)
    }

    pub fn probe(&self, theta: Angle, k_max: usize, tol: f64) -> Result<PeriodProbe> {
        check_search(k_max, tol)?;
        let mut x = theta;
        let mut fragile = false;
        let mut closest = f64::INFINITY;
        for k in 1..=k_max {
            x = self.apply(x)?;
            let d = x.distance(theta);
            closest = closest.min(d);
            if d >= tol / FRAGILE_FACTOR && d < tol * FRAGILE_FACTOR {
                fragile = true;
            }
            if d < tol {
                return Ok(PeriodProbe {
                    period: Period::Finite(k),
                    fragile,
                    closest,
                });
            }
        }
        Ok(PeriodProbe {
            period: Period::None(k_max),
            fragile,
            closest,
        })
    }
}

fn check_search(k_max: usize, tol: f64) -> Result<()> {
    if k_max == 0 {
        return Err(Error::invalid("k_max", "must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    Ok(())
}

/// The period-one criterion `f(−θ) = −f(θ)`, tested directly on `f`.
pub fn has_period_one(f: &CircleDiffeo, theta: Angle, tol: f64) -> bool {
    let lhs = f.eval(theta.antipode());
    let rhs = f.eval(theta).antipode();
    circle_distance(lhs.radians(), rhs.radians()) < tol
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodSample {
    pub theta: Angle,
    pub period: Period,
    pub fragile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodReport {
    pub samples: Vec<PeriodSample>,
    pub histogram: BTreeMap<Period, usize>,
    pub n_samples: usize,
    pub k_max: usize,
    pub tol: f64,
}

/// Periods of `n_samples` equispaced angles `2πi/n`, `i = 0..n`.
///
/// Samples are evaluated in parallel; the report is ordered by index.
pub fn classify_scan(map: &TransitionMap, n_samples: usize, k_max: usize, tol: f64) -> Result<PeriodReport> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    check_search(k_max, tol)?;
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let theta = Angle::grid(i, n_samples);
            map.probe(theta, k_max, tol)
                .map(|p| PeriodSample {
                    theta,
                    period: p.period,
                    fragile: p.fragile,
                })
                .map_err(|e| Error::ScanSample {
                    index: i,
                    theta: theta.radians(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut histogram = BTreeMap::new();
    for s in &samples {
        *histogram.entry(s.period).or_insert(0) += 1;
    }
    Ok(PeriodReport {
        samples,
        histogram,
        n_samples,
        k_max,
        tol,
    })
}

impl PeriodReport {
    pub fn fragile_count(&self) -> usize {
        self.samples.iter().filter(|s| s.fragile).count()
    }

    /// Columns `theta_radians,period_k,fragile_flag`; `period_k` is empty
    /// when no period was found.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "theta_radians,period_k,fragile_flag")?;
        for s in &self.samples {
            let k = s.period.finite().map(|k| k.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{}", s.theta, k, u8::from(s.fragile))?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "period histogram ({} samples, k_max = {}, tol = {:e})\n",
            self.n_samples, self.k_max, self.tol
        );
        for (period, count) in &self.histogram {
            let label = match period {
                Period::Finite(k) => format!("period {k}"),
                Period::None(k) => format!("none (searched to {k})"),
            };
            out.push_str(&format!("  {label:<24} {count}\n"));
        }
        out.push_str(&format!("  {:<24} {}\n", "fragile", self.fragile_count()));
        out
    }
}

/// An angular interval containing a change of period class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassBoundary {
    /// Lift coordinates; `hi − lo` is the remaining uncertainty.
    pub lo: f64,
    pub hi: f64,
    pub left: Period,
    pub right: Period,
}

/// Narrows every class change between neighbouring scan samples by
/// bisecting on the period class. Best effort: a class may change more
/// than once between samples, and boundaries of tolerance-defined classes
/// move with `tol`.
pub fn class_boundaries(map: &TransitionMap, report: &PeriodReport, bisections: usize) -> Result<Vec<ClassBoundary>> {
    let n = report.samples.len();
    let mut out = Vec::new();
    for i in 0..n {
        let a = report.samples[i];
        let b = report.samples[(i + 1) % n];
        if a.period == b.period || n == 1 {
            continue;
        }
        let mut lo = a.theta.radians();
        let mut hi = b.theta.radians();
        if hi <= lo {
            hi += std::f64::consts::TAU;
        }
        for _ in 0..bisections {
            let mid = 0.5 * (lo + hi);
            let class = map.period_of(Angle::new(mid), report.k_max, report.tol)?;
            if class == a.period {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(ClassBoundary {
            lo,
            hi,
            left: a.period,
            right: b.period,
        });
    }
    Ok(out)
}
