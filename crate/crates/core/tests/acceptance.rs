//! Acceptance criteria, one test each. Every test writes a single
//! `PASS`/`FAIL` line straight to stderr so it shows up uncaptured.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use glued_sphere::angle::{circle_distance, line_distance, Angle};
use glued_sphere::circle_map::CircleDiffeo;
use glued_sphere::geodesic::{
    compare_sections, integrate, numerical_return_length, section_verdict, trace_section, GeodesicState,
    IntegratorSettings, SectionLength, TraceSettings,
};
use glued_sphere::metric::{Chart, GluedMetric, DEFAULT_T0, DEFAULT_T1};
use glued_sphere::period::{classify_scan, Period, TransitionMap};
use glued_sphere::verifier::{
    all_or_none_check, gluing_check, radial_geodesic_check, rational_closure, CommonPeriod, Fraction, RadiusPair,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K_MAX: usize = 64;
const TOL: f64 = 1e-9;
/// Smallest distance from the center of the straight lines in criterion 8.
const MIN_IMPACT: f64 = 0.02;

fn report(criterion: u32, title: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    let line = format!("acceptance {criterion:>2} {status}  {title}: {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(passed, "criterion {criterion} failed: {detail}");
}

fn bump() -> CircleDiffeo {
    CircleDiffeo::semicircle_bump(0.3).unwrap()
}

fn metric(f: CircleDiffeo) -> GluedMetric {
    GluedMetric::new(f, DEFAULT_T0, DEFAULT_T1).unwrap()
}

/// Brute-force period classification for the semicircle bump, written
/// independently of the library: closed-form lift, plain bisection for the
/// inverse, and direct iteration of the transition map.
mod oracle {
    use super::*;

    const AMPLITUDE: f64 = 0.3;

    fn lift(x: f64) -> f64 {
        let u = (x - PI).rem_euclid(TAU) / PI;
        if u <= 0.0 || u >= 1.0 {
            return x;
        }
        x + AMPLITUDE * (4.0 - 1.0 / (u * (1.0 - u))).exp()
    }

    fn inverse(y: f64) -> f64 {
        let (mut lo, mut hi) = (y - 1.0, y + 1.0);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return mid;
            }
            if lift(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    fn wrap(x: f64) -> f64 {
        let r = x.rem_euclid(TAU);
        if r >= TAU {
            0.0
        } else {
            r
        }
    }

    pub fn transition(theta: f64) -> f64 {
        let far = wrap(lift(theta) + PI);
        wrap(inverse(far) + PI)
    }

    pub fn period(theta: f64, k_max: usize, tol: f64) -> Period {
        let mut x = theta;
        for k in 1..=k_max {
            x = transition(x);
            let d = (x - theta).abs();
            if d.min(TAU - d) < tol {
                return Period::Finite(k);
            }
        }
        Period::None(k_max)
    }
}

#[test]
fn criterion_01_trivial_dynamics() {
    let mut detail = Vec::new();
    let mut passed = true;
    for (name, f) in [("identity", CircleDiffeo::identity()), ("rotation(π/3)", CircleDiffeo::rotation(PI / 3.0).unwrap())] {
        let report = classify_scan(&TransitionMap::new(f), 360, K_MAX, TOL).unwrap();
        let ones = report.histogram.get(&Period::Finite(1)).copied().unwrap_or(0);
        passed &= ones == 360 && report.histogram.len() == 1;
        detail.push(format!("{name} period 1 at {ones}/360"));
    }
    report(1, "trivial dynamics", passed, &detail.join(", "));
}

#[test]
fn criterion_02_odd_equivariance() {
    let map = TransitionMap::new(CircleDiffeo::harmonic(0.2, 2, 0.0).unwrap());
    let worst = (0..720)
        .map(|i| {
            let theta = Angle::grid(i, 720);
            map.apply(theta).unwrap().distance(theta)
        })
        .fold(0.0, f64::max);
    report(2, "odd equivariance", worst < 1e-9, &format!("max |T(θ) − θ| = {worst:.3e} over 720 samples"));
}

#[test]
fn criterion_03_non_constant_period() {
    let report_ = classify_scan(&TransitionMap::new(bump()), 360, K_MAX, TOL).unwrap();
    let is_one = |i: usize| report_.samples[i].period == Period::Finite(1);
    let other = report_
        .histogram
        .keys()
        .any(|p| matches!(p, Period::Finite(k) if *k >= 2) || *p == Period::None(K_MAX));
    let mismatches: Vec<usize> = report_
        .samples
        .iter()
        .enumerate()
        .filter(|(_, s)| oracle::period(s.theta.radians(), K_MAX, TOL) != s.period)
        .map(|(i, _)| i)
        .collect();
    let passed = is_one(0) && is_one(180) && other && mismatches.is_empty();
    let hist: Vec<String> = report_.histogram.iter().map(|(p, c)| format!("{p}: {c}")).collect();
    report(
        3,
        "non-constant period",
        passed,
        &format!(
            "histogram {{{}}}, θ=0 and θ=π period 1: {}, oracle mismatches {}",
            hist.join(", "),
            is_one(0) && is_one(180),
            mismatches.len()
        ),
    );
}

#[test]
fn criterion_04_non_isometric_sections() {
    let f = bump();
    let m = metric(f.clone());
    let settings = TraceSettings::default();

    // certified higher-period start: library scan, confirmed by the oracle
    let dense = classify_scan(&TransitionMap::new(f.clone()), 3600, K_MAX, TOL).unwrap();
    let candidate = dense
        .samples
        .iter()
        .find(|s| matches!(s.period, Period::Finite(k) if k >= 2) && oracle::period(s.theta.radians(), K_MAX, TOL) == s.period);

    let base = trace_section(&f, Angle::ZERO, &settings).unwrap();
    let base_verdict = section_verdict(&base, TOL).unwrap();
    let exact_base = base_verdict.length == SectionLength::Finite(4);
    let numeric = numerical_return_length(
        &m,
        Angle::ZERO,
        1e-6,
        &IntegratorSettings {
            s_max: 4.5,
            ..Default::default()
        },
    )
    .unwrap();
    let numeric_ok = numeric.is_some_and(|l| (l - 4.0).abs() < 1e-5);

    let (higher_ok, higher_detail) = match candidate {
        None => (false, "no start with period k >= 2 found among 3600 samples".to_string()),
        Some(s) => {
            let cmp = compare_sections(&f, Angle::ZERO, s.theta, &settings).unwrap();
            let k = cmp.b.period as u64;
            let numeric_b = numerical_return_length(
                &m,
                s.theta,
                1e-6,
                &IntegratorSettings {
                    s_max: 4.0 * k as f64 + 0.5,
                    ..Default::default()
                },
            )
            .unwrap();
            let ok = cmp.a.length == 4
                && cmp.b.length == 4 * k
                && !cmp.isometric
                && numeric_b.is_some_and(|l| (l - (4 * k) as f64).abs() < 1e-5);
            (ok, format!("θ = {} has period {k}, lengths 4 and {}", s.theta.radians(), cmp.b.length))
        }
    };
    let numeric_text = numeric.map_or("none".to_string(), |l| format!("{l:.12}"));
    report(
        4,
        "non-isometric sections",
        exact_base && numeric_ok && higher_ok,
        &format!("θ = 0 exact length 4: {exact_base}, numerical {numeric_text}; {higher_detail}"),
    );
}

#[test]
fn criterion_05_non_injective_sections() {
    let f = bump();
    let theta0 = 1.5 * PI;
    let certified = oracle::period(theta0, K_MAX, TOL) == Period::None(K_MAX);
    let settings = TraceSettings {
        max_legs: 102,
        ..Default::default()
    };
    let trace = trace_section(&f, Angle::new(theta0), &settings).unwrap();
    let verdict = section_verdict(&trace, TOL).unwrap();

    let mut detail = Vec::new();
    let mut passed = certified && trace.legs.len() == 102 && !verdict.injective && verdict.witness.is_some();
    for chart in [Chart::One, Chart::Two] {
        let headings: Vec<f64> = trace
            .center_passages
            .iter()
            .filter(|p| p.chart == chart)
            .map(|p| p.heading.radians())
            .collect();
        let min_sep = headings
            .iter()
            .enumerate()
            .flat_map(|(i, a)| headings[..i].iter().map(move |b| line_distance(*a, *b)))
            .fold(f64::INFINITY, f64::min);
        passed &= headings.len() >= 25 && min_sep >= TOL;
        detail.push(format!("chart {chart}: {} passages, min line separation {min_sep:.3e}", headings.len()));
    }
    detail.push(format!("witness {:?}", verdict.witness.map(|w| (w.chart.index(), w.first_leg, w.second_leg))));
    report(5, "non-injective sections", passed, &detail.join("; "));
}

#[test]
fn criterion_06_foliation_axiom() {
    let m = metric(bump());
    let settings = IntegratorSettings {
        ds: 1e-3,
        s_max: 20.0,
        ..Default::default()
    };
    let foliation = all_or_none_check(&m, 100, 0, &settings);
    let radial = radial_geodesic_check(&m, 36, 6.5, &settings);
    report(
        6,
        "foliation axiom",
        foliation.passed && radial.passed,
        &format!("{}; {}", foliation.parameters, radial.parameters),
    );
}

#[test]
fn criterion_07_metric_correctness() {
    let m = metric(bump());
    let gluing = gluing_check(&m, 720, 64);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let chart = if rng.random_bool(0.5) { Chart::One } else { Chart::Two };
        let t = rng.random_range(DEFAULT_T0..DEFAULT_T1);
        let theta = rng.random_range(0.0..TAU);
        let g = |t: f64, th: f64| m.metric_components(chart, t, Angle::new(th)).unwrap().g_thetatheta;
        let g0 = g(t, theta);
        let dg_t = (g(t + h, theta) - g(t - h, theta)) / (2.0 * h);
        let dg_th = (g(t, theta + h) - g(t, theta - h)) / (2.0 * h);
        let c = m.christoffel(chart, t, Angle::new(theta)).unwrap();
        worst = worst
            .max((c.t_thetatheta + 0.5 * dg_t).abs())
            .max((c.theta_ttheta - 0.5 * dg_t / g0).abs())
            .max((c.theta_thetatheta - 0.5 * dg_th / g0).abs());
    }

    let flat = (0..=1000).all(|i| {
        let t = DEFAULT_T0 * i as f64 / 1000.0;
        (0..36).all(|j| {
            let theta = Angle::grid(j, 36);
            m.warp(Chart::One, t, theta) == t && m.warp(Chart::Two, t, theta) == t
        })
    });
    report(
        7,
        "metric correctness",
        gluing.passed && worst < 1e-5 && flat,
        &format!("gluing residual {:.3e}, christoffel vs finite differences {worst:.3e}, φ = t on [0, t0]: {flat}", gluing.residual),
    );
}

#[test]
fn criterion_08_integrator_validation() {
    let m = metric(bump());
    let settings = IntegratorSettings {
        s_max: 0.2,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let chart = if rng.random_bool(0.5) { Chart::One } else { Chart::Two };
        let t = rng.random_range(0.03..0.045);
        let theta = rng.random_range(0.0..TAU);
        // keep the closest approach to the center at least MIN_IMPACT away
        let alpha = loop {
            let a: f64 = rng.random_range(0.0..TAU);
            if t * a.sin().abs() >= MIN_IMPACT {
                break a;
            }
        };
        let init = GeodesicState::with_heading(&m, chart, t, Angle::new(theta), alpha);
        let traj = integrate(&m, init, &settings).unwrap();
        // straight line in the flat polar zone
        let (x0, y0) = (t * theta.cos(), t * theta.sin());
        let (ux, uy) = (alpha.cos() * theta.cos() - alpha.sin() * theta.sin(), alpha.cos() * theta.sin() + alpha.sin() * theta.cos());
        for st in &traj.states {
            let (x, y) = (st.t * st.theta.cos(), st.t * st.theta.sin());
            let (ex, ey) = (x0 + st.s * ux, y0 + st.s * uy);
            worst = worst.max((x - ex).hypot(y - ey));
        }
    }
    let radial = radial_geodesic_check(&m, 36, 6.5, &IntegratorSettings::default());
    report(
        8,
        "integrator validation",
        worst < 1e-8 && radial.passed,
        &format!("max deviation from straight lines {worst:.3e}; {}", radial.parameters),
    );
}

#[test]
fn criterion_09_common_period() {
    let closure = |r: (u64, u64), s: (u64, u64)| {
        rational_closure(RadiusPair::Rational(Fraction::new(r.0, r.1).unwrap(), Fraction::new(s.0, s.1).unwrap())).unwrap()
    };
    let six = closure((2, 1), (3, 1));
    let one = closure((1, 1), (1, 1));
    let half_third = closure((1, 2), (1, 3));
    let never = rational_closure(RadiusPair::Irrational).unwrap();
    let unit = CommonPeriod::TwoPiTimes(Fraction::integer(1).unwrap());
    let passed = six == CommonPeriod::TwoPiTimes(Fraction::integer(6).unwrap())
        && one == unit
        && half_third == unit
        && never == CommonPeriod::Never
        && never.to_string() == "never closes";
    report(
        9,
        "common-period arithmetic",
        passed,
        &format!("(2, 3) -> 2π·{six}, (1, 1) -> 2π·{one}, (1/2, 1/3) -> 2π·{half_third}, irrational -> {never}"),
    );
}

#[test]
fn criterion_10_inverse_accuracy() {
    let families = [
        ("identity", CircleDiffeo::identity()),
        ("rotation", CircleDiffeo::rotation(1.0).unwrap()),
        ("bump", bump()),
        ("harmonic", CircleDiffeo::harmonic(0.2, 2, 0.0).unwrap()),
        ("spline", CircleDiffeo::spline(&[(0.0, 0.2), (1.5, 1.4), (3.0, 3.3), (4.5, 4.4)]).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut detail = Vec::new();
    let mut passed = true;
    for (name, f) in &families {
        let worst = (0..10_000)
            .map(|_| {
                let y = rng.random_range(0.0..TAU);
                circle_distance(f.eval(f.inverse(Angle::new(y)).unwrap()).radians(), y)
            })
            .fold(0.0, f64::max);
        passed &= worst < 1e-12;
        detail.push(format!("{name} {worst:.1e}"));
    }
    report(10, "inverse accuracy", passed, &detail.join(", "));
}
