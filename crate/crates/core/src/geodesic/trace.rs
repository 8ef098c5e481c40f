//! Exact itineraries of sections.
//!
//! A section starts at the chart-1 center, runs radially to the boundary
//! angle `θ0`, is identified with `f(θ0)` in chart 2 and runs along that
//! diameter to `−f(θ0)`, is identified with `f⁻¹(−f(θ0))` in chart 1 and
//! runs along that diameter to `T(θ0) = −f⁻¹(−f(θ0))`, and so on. Radial
//! arclength equals the radial coordinate difference, so every leg length
//! is an integer.

use serde::Serialize;

use crate::angle::{line_distance, Angle};
use crate::circle_map::CircleDiffeo;
use crate::error::{Error, Result};
use crate::metric::Chart;
use crate::period::{Period, TransitionMap, DEFAULT_K_MAX, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LegKind {
    Radius,
    Diameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LegPoint {
    Center,
    Boundary(Angle),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Leg {
    pub chart: Chart,
    pub entry: LegPoint,
    pub exit: LegPoint,
    pub kind: LegKind,
}

impl Leg {
    pub fn length(&self) -> u64 {
        match self.kind {
            LegKind::Radius => 1,
            LegKind::Diameter => 2,
        }
    }
}

/// Identification of `chart1` on the chart-1 boundary with `chart2 = f(chart1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub from: Chart,
    pub chart1: Angle,
    pub chart2: Angle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterPassage {
    pub chart: Chart,
    pub leg_index: usize,
    /// Direction of travel through the center.
    pub heading: Angle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSettings {
    pub max_legs: usize,
    pub k_max: usize,
    pub tol: f64,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            max_legs: 2 * DEFAULT_K_MAX + 1,
            k_max: DEFAULT_K_MAX,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionTrace {
    pub start: Angle,
    pub legs: Vec<Leg>,
    pub crossings: Vec<Crossing>,
    /// Passages through a center after the start, in order.
    pub center_passages: Vec<CenterPassage>,
    /// `θ0, T(θ0), T²(θ0), …`
    pub orbit: Vec<Angle>,
    /// Period of `θ0` searched to `k_max`.
    pub period: Period,
    /// Number of `T`-iterations after which the itinerary returned to `θ0`.
    pub closed_after: Option<usize>,
    pub max_legs: usize,
    pub tol: f64,
}

/// Builds the itinerary leg by leg until it closes or `max_legs` legs exist.
pub fn trace_section(f: &CircleDiffeo, theta0: Angle, settings: &TraceSettings) -> Result<SectionTrace> {
    if settings.max_legs < 2 {
        return Err(Error::invalid("max_legs", "must be at least 2"));
    }
    let map = TransitionMap::new(f.clone());
    let period = map.period_of(theta0, settings.k_max, settings.tol)?;

    let mut legs = vec![Leg {
        chart: Chart::One,
        entry: LegPoint::Center,
        exit: LegPoint::Boundary(theta0),
        kind: LegKind::Radius,
    }];
    let mut crossings = Vec::new();
    let mut center_passages = Vec::new();
    let mut orbit = vec![theta0];
    let mut closed_after = None;

    let mut diameter = |chart: Chart, entry: Angle, legs: &mut Vec<Leg>| {
        let exit = entry.antipode();
        center_passages.push(CenterPassage {
            chart,
            leg_index: legs.len(),
            heading: exit,
        });
        legs.push(Leg {
            chart,
            entry: LegPoint::Boundary(entry),
            exit: LegPoint::Boundary(exit),
            kind: LegKind::Diameter,
        });
        exit
    };

    let mut x = theta0;
    while legs.len() < settings.max_legs {
        let image = f.eval(x);
        crossings.push(Crossing {
            from: Chart::One,
            chart1: x,
            chart2: image,
        });
        let far = diameter(Chart::Two, image, &mut legs);
        if legs.len() == settings.max_legs {
            break;
        }
        let back = f.inverse(far)?;
        crossings.push(Crossing {
            from: Chart::Two,
            chart1: back,
            chart2: far,
        });
        x = diameter(Chart::One, back, &mut legs);
        orbit.push(x);
        if x.distance(theta0) < settings.tol {
            closed_after = Some(orbit.len() - 1);
            break;
        }
    }

    Ok(SectionTrace {
        start: theta0,
        legs,
        crossings,
        center_passages,
        orbit,
        period,
        closed_after,
        max_legs: settings.max_legs,
        tol: settings.tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionLength {
    Finite(u64),
    Unbounded,
}

/// Two passages through the same center along different lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InjectivityWitness {
    pub chart: Chart,
    /// Leg index of the earlier passage; 0 is the start at the chart-1 center.
    pub first_leg: usize,
    pub second_leg: usize,
    pub first_heading: Angle,
    pub second_heading: Angle,
    pub line_separation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionVerdict {
    pub closed: bool,
    pub period: Period,
    pub length: SectionLength,
    pub injective: bool,
    pub witness: Option<InjectivityWitness>,
}

/// Closure, length and injectivity of a traced section.
///
/// A closed section of period `k` is the loop center → … → center made of
/// one radius, `2k − 1` diameters and a final radius, of length `4k`.
/// Injectivity fails when a center is passed along two lines at least `tol`
/// apart; retracing the same line does not count.
pub fn section_verdict(trace: &SectionTrace, tol: f64) -> Result<SectionVerdict> {
    let (closed, length) = match trace.period {
        Period::Finite(k) => {
            let needed = 2 * k + 1;
            if trace.max_legs < needed || trace.legs.len() < needed {
                return Err(Error::HorizonTooShort {
                    legs: trace.max_legs,
                    period: k,
                    needed,
                });
            }
            let through_last_diameter: u64 = trace.legs[..needed].iter().map(Leg::length).sum();
            // the closing diameter is only run up to its center
            (true, SectionLength::Finite(through_last_diameter - 1))
        }
        Period::None(_) => (false, SectionLength::Unbounded),
    };

    let start = CenterPassage {
        chart: Chart::One,
        leg_index: 0,
        heading: trace.start,
    };
    let passages: Vec<CenterPassage> = std::iter::once(start).chain(trace.center_passages.iter().copied()).collect();
    let mut witness = None;
    'search: for (j, later) in passages.iter().enumerate() {
        for earlier in &passages[..j] {
            if earlier.chart != later.chart {
                continue;
            }
            let sep = line_distance(earlier.heading.radians(), later.heading.radians());
            if sep >= tol {
                witness = Some(InjectivityWitness {
                    chart: later.chart,
                    first_leg: earlier.leg_index,
                    second_leg: later.leg_index,
                    first_heading: earlier.heading,
                    second_heading: later.heading,
                    line_separation: sep,
                });
                break 'search;
            }
        }
    }

    Ok(SectionVerdict {
        closed,
        period: trace.period,
        length,
        injective: witness.is_none(),
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionSummary {
    pub start: Angle,
    pub period: usize,
    pub length: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionComparison {
    pub a: SectionSummary,
    pub b: SectionSummary,
    /// Closed sections of different lengths cannot be isometric.
    pub isometric: bool,
}

pub fn compare_sections(
    f: &CircleDiffeo,
    theta_a: Angle,
    theta_b: Angle,
    settings: &TraceSettings,
) -> Result<SectionComparison> {
    let summarize = |theta: Angle| -> Result<SectionSummary> {
        let verdict = section_verdict(&trace_section(f, theta, settings)?, settings.tol)?;
        match (verdict.period, verdict.length) {
            (Period::Finite(k), SectionLength::Finite(length)) => Ok(SectionSummary {
                start: theta,
                period: k,
                length,
            }),
            _ => Err(Error::NotClosed {
                theta: theta.radians(),
            }),
        }
    };
    let a = summarize(theta_a)?;
    let b = summarize(theta_b)?;
    Ok(SectionComparison {
        a,
        b,
        isometric: a.length == b.length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump() -> CircleDiffeo {
        CircleDiffeo::semicircle_bump(0.3).unwrap()
    }

    #[test]
    fn identity_closes_after_one_pair() {
        let trace = trace_section(&CircleDiffeo::identity(), Angle::ZERO, &TraceSettings::default()).unwrap();
        let kinds: Vec<LegKind> = trace.legs.iter().map(|l| l.kind).collect();
        assert_eq!(kinds, [LegKind::Radius, LegKind::Diameter, LegKind::Diameter]);
        assert_eq!(trace.orbit, [Angle::ZERO, Angle::ZERO]);
        assert_eq!(trace.closed_after, Some(1));
        let v = section_verdict(&trace, DEFAULT_TOL).unwrap();
        assert!(v.closed && v.injective);
        assert_eq!(v.length, SectionLength::Finite(4));
        assert_eq!(v.period, Period::Finite(1));
    }

    #[test]
    fn rotation_crossings_are_shifted() {
        let alpha = 0.9;
        let f = CircleDiffeo::rotation(alpha).unwrap();
        let theta0 = Angle::new(2.0);
        let trace = trace_section(&f, theta0, &TraceSettings::default()).unwrap();
        assert_eq!(trace.period, Period::Finite(1));
        assert!(trace.crossings[0].chart1.distance(theta0) < 1e-15);
        assert!(trace.crossings[0].chart2.distance(Angle::new(2.0 + alpha)) < 1e-15);
        let v = section_verdict(&trace, DEFAULT_TOL).unwrap();
        assert_eq!(v.length, SectionLength::Finite(4));
        assert!(v.injective);
    }

    #[test]
    fn legs_alternate_charts() {
        let trace = trace_section(&bump(), Angle::new(1.5 * PI), &TraceSettings { max_legs: 20, ..Default::default() })
            .unwrap();
        assert_eq!(trace.legs.len(), 20);
        assert_eq!(trace.legs[0].kind, LegKind::Radius);
        for pair in trace.legs[1..].windows(2) {
            assert_ne!(pair[0].chart, pair[1].chart);
            assert_eq!(pair[1].kind, LegKind::Diameter);
        }
        assert_eq!(trace.legs[1].chart, Chart::Two);
    }

    #[test]
    fn orbit_follows_transition_map() {
        let f = bump();
        let theta0 = Angle::new(4.0);
        let trace = trace_section(&f, theta0, &TraceSettings { max_legs: 41, ..Default::default() }).unwrap();
        let expected = TransitionMap::new(f).orbit(theta0, 20).unwrap();
        assert_eq!(trace.orbit, expected);
    }

    #[test]
    fn open_section_is_not_injective() {
        let trace =
            trace_section(&bump(), Angle::new(1.5 * PI), &TraceSettings { max_legs: 5, ..Default::default() }).unwrap();
        let v = section_verdict(&trace, DEFAULT_TOL).unwrap();
        assert!(!v.closed && !v.injective);
        assert_eq!(v.length, SectionLength::Unbounded);
        let w = v.witness.unwrap();
        assert_eq!(w.chart, Chart::One);
        assert_eq!((w.first_leg, w.second_leg), (0, 2));
    }

    #[test]
    fn short_horizon_is_reported() {
        let trace = trace_section(&CircleDiffeo::identity(), Angle::ZERO, &TraceSettings { max_legs: 2, ..Default::default() })
            .unwrap();
        assert!(matches!(section_verdict(&trace, DEFAULT_TOL), Err(Error::HorizonTooShort { needed: 3, .. })));
        assert!(trace_section(&CircleDiffeo::identity(), Angle::ZERO, &TraceSettings { max_legs: 1, ..Default::default() })
            .is_err());
    }

    #[test]
    fn comparison_requires_closed_sections() {
        let f = bump();
        let settings = TraceSettings::default();
        let cmp = compare_sections(&f, Angle::ZERO, Angle::new(PI), &settings).unwrap();
        assert!(cmp.isometric);
        assert_eq!((cmp.a.length, cmp.b.length), (4, 4));
        assert!(matches!(
            compare_sections(&f, Angle::ZERO, Angle::new(1.5 * PI), &settings),
            Err(Error::NotClosed { .. })
        ));
    }

    #[test]
    fn trace_serializes_to_json() {
        let trace = trace_section(&CircleDiffeo::identity(), Angle::ZERO, &TraceSettings::default()).unwrap();
        let json = serde_json::to_value(&trace).unwrap();
        assert_eq!(json["legs"][0]["entry"], "center");
        assert_eq!(json["period"]["finite"], 1);
        assert_eq!(json["legs"][1]["chart"], 2);
    }
}
