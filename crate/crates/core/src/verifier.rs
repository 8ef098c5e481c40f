//! Numerical checks that the glued metric makes the leaves a singular
//! Riemannian foliation with radial sections, and the common-period
//! arithmetic of two circular motions.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::{self, Write};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::angle::{circle_distance, Angle};
use crate::error::{Error, Result};
use crate::geodesic::{
    integrate, trace_section, EventKind, GeodesicState, IntegratorSettings, TraceSettings, Trajectory,
};
use crate::metric::{Chart, Christoffel, GluedMetric};

pub const GLUING_RESIDUAL_LIMIT: f64 = 1e-14;
pub const RADIAL_DRIFT_LIMIT: f64 = 1e-8;
pub const CROSSING_AGREEMENT_LIMIT: f64 = 1e-6;
pub const LEAF_DISTANCE_LIMIT: f64 = 1e-12;
/// Smallest initial `|vθ|` of the random non-radial states.
pub const MIN_ANGULAR_SPEED: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub parameters: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "check,passed,residual")?;
        for c in &self.checks {
            writeln!(w, "{},{},{:e}", c.name, c.passed, c.residual)?;
        }
        Ok(())
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{status}  {:<20} residual {:<12.3e} {}", c.name, c.residual, c.parameters)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifySettings {
    pub n_geodesics: usize,
    pub n_radial: usize,
    pub radial_s_max: f64,
    pub leaf_t_a: f64,
    pub leaf_t_b: f64,
    pub n_theta: usize,
    pub gluing_n_t: usize,
    pub seed: u64,
    pub integrator: IntegratorSettings,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            n_geodesics: 100,
            n_radial: 36,
            radial_s_max: 6.5,
            leaf_t_a: 0.2,
            leaf_t_b: 0.7,
            n_theta: 720,
            gluing_n_t: 64,
            seed: 0,
            integrator: IntegratorSettings::default(),
        }
    }
}

fn failed(name: &str, parameters: String, err: &Error) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: false,
        residual: f64::INFINITY,
        parameters: format!("{parameters} error: {err}"),
    }
}

/// Random unit-speed state with `|vθ| ≥ MIN_ANGULAR_SPEED`, away from the
/// centers (`t ≥ t0`).
pub fn random_non_radial_state(metric: &GluedMetric, rng: &mut impl Rng) -> GeodesicState {
    loop {
        let chart = if rng.random_bool(0.5) { Chart::One } else { Chart::Two };
        let t0 = metric.profile(chart).t0();
        let t = rng.random_range(t0..1.0);
        let theta = Angle::new(rng.random_range(0.0..TAU));
        let alpha = rng.random_range(0.0..TAU);
        let state = GeodesicState::with_heading(metric, chart, t, theta, alpha);
        if state.vtheta.abs() >= MIN_ANGULAR_SPEED {
            return state;
        }
    }
}

fn sign_changes(traj: &Trajectory) -> (usize, f64) {
    let sign = traj.states[0].vtheta.signum();
    let mut changes = 0;
    let mut margin = f64::INFINITY;
    for st in &traj.states {
        let signed = st.vtheta * sign;
        margin = margin.min(signed);
        if signed <= 0.0 {
            changes += 1;
        }
    }
    (changes, margin)
}

/// A geodesic is orthogonal to the leaves at all or none of its points:
/// `vθ` keeps its sign along non-radial geodesics and stays zero along
/// radial ones. The residual is the number of sign changes plus the
/// largest `|vθ|` seen on the radial controls.
pub fn all_or_none_check(metric: &GluedMetric, n_geodesics: usize, seed: u64, settings: &IntegratorSettings) -> CheckResult {
    let name = "all_or_none";
    let params = format!("n = {n_geodesics}, s_max = {}, ds = {}, seed = {seed}", settings.s_max, settings.ds);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<GeodesicState> = (0..n_geodesics).map(|_| random_non_radial_state(metric, &mut rng)).collect();

    let mut total_changes = 0;
    let mut min_margin = f64::INFINITY;
    for init in states {
        match integrate(metric, init, settings) {
            Ok(traj) => {
                let (changes, margin) = sign_changes(&traj);
                total_changes += changes;
                min_margin = min_margin.min(margin);
            }
            Err(e) => return failed(name, params, &e),
        }
    }

    let mut radial_max: f64 = 0.0;
    for i in 0..4 {
        let init = GeodesicState::radial(Chart::Two, 0.5, Angle::grid(i, 4), i % 2 == 0);
        match integrate(metric, init, settings) {
            Ok(traj) => {
                radial_max = traj.states.iter().map(|s| s.vtheta.abs()).fold(radial_max, f64::max);
            }
            Err(e) => return failed(name, params, &e),
        }
    }

    CheckResult {
        name: name.to_string(),
        passed: total_changes == 0 && radial_max < RADIAL_DRIFT_LIMIT,
        residual: total_changes as f64 + radial_max,
        parameters: format!("{params}, sign changes = {total_changes}, min signed vtheta = {min_margin:.3e}"),
    }
}

/// Radial lines are geodesics: `Γ^t_tt = Γ^θ_tt = 0`, numerically `θ` stays
/// constant between events, and gluing crossings land where the exact
/// itinerary says.
pub fn radial_geodesic_check(metric: &GluedMetric, n_samples: usize, s_max: f64, settings: &IntegratorSettings) -> CheckResult {
    let name = "radial_geodesic";
    let params = format!("n = {n_samples}, s_max = {s_max}");
    let settings = IntegratorSettings { s_max, ..*settings };
    let symbolic = Christoffel::T_TT.abs().max(Christoffel::THETA_TT.abs());
    let mut drift: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    let mut min_transitions = usize::MAX;
    let trace_settings = TraceSettings {
        max_legs: 2 * (s_max as usize) + 4,
        ..Default::default()
    };
    for i in 0..n_samples {
        let theta0 = Angle::grid(i, n_samples);
        let init = GeodesicState::radial(Chart::One, 0.0, theta0, true);
        let traj = match integrate(metric, init, &settings) {
            Ok(t) => t,
            Err(e) => return failed(name, params, &e),
        };
        drift = drift.max(radial_drift(&traj));
        min_transitions = min_transitions.min(traj.events.len());

        let trace = match trace_section(metric.diffeo(), theta0, &trace_settings) {
            Ok(t) => t,
            Err(e) => return failed(name, params, &e),
        };
        let gluings = traj.events.iter().filter(|e| matches!(e.kind, EventKind::Gluing { .. }));
        for (event, crossing) in gluings.zip(&trace.crossings) {
            let expected = match event.kind {
                EventKind::Gluing { to: Chart::Two, .. } => crossing.chart2,
                _ => crossing.chart1,
            };
            mismatch = mismatch.max(circle_distance(event.theta_after, expected.radians()));
        }
    }
    let residual = symbolic.max(drift).max(mismatch);
    CheckResult {
        name: name.to_string(),
        passed: symbolic == 0.0 && drift < RADIAL_DRIFT_LIMIT && mismatch < CROSSING_AGREEMENT_LIMIT && min_transitions >= 3,
        residual,
        parameters: format!("{params}, max dtheta = {drift:.3e}, crossing mismatch = {mismatch:.3e}, min transitions = {min_transitions}"),
    }
}

/// Largest `|Δθ|` between consecutive samples not separated by an event.
pub fn radial_drift(traj: &Trajectory) -> f64 {
    let mut drift: f64 = 0.0;
    let mut next_event = traj.events.iter().map(|e| e.s).peekable();
    for pair in traj.states.windows(2) {
        let mut crossed = false;
        while let Some(&s) = next_event.peek() {
            if s <= pair[1].s {
                crossed = true;
                next_event.next();
            } else {
                break;
            }
        }
        if !crossed {
            drift = drift.max(circle_distance(pair[0].theta, pair[1].theta));
        }
    }
    drift
}

/// Simpson quadrature of `sqrt(g_tt)` along `θ = const` from `a` to `b`.
fn radial_length(metric: &GluedMetric, chart: Chart, a: f64, b: f64, theta: Angle) -> Result<f64> {
    const PANELS: usize = 64;
    let h = (b - a) / PANELS as f64;
    let mut sum = 0.0;
    for i in 0..=PANELS {
        let t = a + h * i as f64;
        let w = if i == 0 || i == PANELS {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * metric.metric_components(chart, t, theta)?.g_tt.sqrt();
    }
    Ok(sum * h / 3.0)
}

/// Leaves are equidistant: the radial distance from `L_{t_a}` to `L_{t_b}`
/// is `t_b − t_a` along every radial line, also across the gluing circle.
pub fn leaf_equidistance_check(metric: &GluedMetric, t_a: f64, t_b: f64, n_theta: usize) -> CheckResult {
    let name = "leaf_equidistance";
    let params = format!("t_a = {t_a}, t_b = {t_b}, n_theta = {n_theta}");
    if !(0.0 < t_a && t_a < t_b && t_b <= 1.0) {
        return failed(name, params, &Error::invalid("t_a/t_b", "need 0 < t_a < t_b <= 1"));
    }
    let f = metric.diffeo();
    let mut worst: f64 = 0.0;
    for i in 0..n_theta {
        let theta = Angle::grid(i, n_theta);
        let result = (|| -> Result<(f64, f64)> {
            let same = radial_length(metric, Chart::One, t_a, t_b, theta)?;
            let across = radial_length(metric, Chart::One, 0.9, 1.0, theta)?
                + radial_length(metric, Chart::Two, 0.9, 1.0, f.eval(theta))?;
            Ok((same, across))
        })();
        match result {
            Ok((same, across)) => {
                worst = worst.max((same - (t_b - t_a)).abs()).max((across - 0.2).abs());
            }
            Err(e) => return failed(name, params, &e),
        }
    }
    CheckResult {
        name: name.to_string(),
        passed: worst < LEAF_DISTANCE_LIMIT,
        residual: worst,
        parameters: params,
    }
}

pub fn gluing_check(metric: &GluedMetric, n_theta: usize, n_t: usize) -> CheckResult {
    let residual = metric.gluing_residual(n_theta, n_t);
    CheckResult {
        name: "gluing".to_string(),
        passed: residual < GLUING_RESIDUAL_LIMIT,
        residual,
        parameters: format!("n_theta = {n_theta}, n_t = {n_t}"),
    }
}

/// Runs every check concurrently; results are ordered by check name.
pub fn verify(metric: &GluedMetric, settings: &VerifySettings) -> VerificationReport {
    let ((gluing, leaf), (foliation, radial)) = rayon::join(
        || {
            rayon::join(
                || gluing_check(metric, settings.n_theta, settings.gluing_n_t),
                || leaf_equidistance_check(metric, settings.leaf_t_a, settings.leaf_t_b, settings.n_theta),
            )
        },
        || {
            rayon::join(
                || all_or_none_check(metric, settings.n_geodesics, settings.seed, &settings.integrator),
                || radial_geodesic_check(metric, settings.n_radial, settings.radial_s_max, &settings.integrator),
            )
        },
    );
    let mut checks = vec![gluing, leaf, foliation, radial];
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    VerificationReport { checks }
}

/// Positive rational number in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::NonPositiveRadius);
        }
        let g = num.gcd(&den);
        Ok(Fraction {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(n: u64) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    fn from_wide(num: u128, den: u128) -> Result<Self> {
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        match (u64::try_from(num), u64::try_from(den)) {
            (Ok(num), Ok(den)) => Fraction::new(num, den),
            _ => Err(Error::Overflow("common period")),
        }
    }

    pub fn scale(self, c: Fraction) -> Result<Self> {
        Self::from_wide(u128::from(self.num) * u128::from(c.num), u128::from(self.den) * u128::from(c.den))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommonPeriod {
    /// The least common period is `2π` times this multiple.
    TwoPiTimes(Fraction),
    Never,
}

impl CommonPeriod {
    pub fn length(self) -> Option<f64> {
        match self {
            CommonPeriod::TwoPiTimes(m) => Some(2.0 * PI * m.to_f64()),
            CommonPeriod::Never => None,
        }
    }
}

impl fmt::Display for CommonPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommonPeriod::TwoPiTimes(m) => write!(f, "{m}"),
            CommonPeriod::Never => write!(f, "never closes"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusPair {
    Rational(Fraction, Fraction),
    /// The ratio of the two radii is irrational.
    Irrational,
}

/// Least `L > 0` that is a whole number of turns around circles of radii
/// `r` and `s`: `L = 2π·lcm(r, s)` with
/// `lcm(p₁/q₁, p₂/q₂) = lcm(p₁q₂, p₂q₁)/(q₁q₂)`, in exact integers.
pub fn rational_closure(radii: RadiusPair) -> Result<CommonPeriod> {
    let (r, s) = match radii {
        RadiusPair::Irrational => return Ok(CommonPeriod::Never),
        RadiusPair::Rational(r, s) => (r, s),
    };
    let a = u128::from(r.num) * u128::from(s.den);
    let b = u128::from(s.num) * u128::from(r.den);
    let den = u128::from(r.den) * u128::from(s.den);
    Ok(CommonPeriod::TwoPiTimes(Fraction::from_wide(a.lcm(&b), den)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_map::CircleDiffeo;
    use crate::metric::{DEFAULT_T0, DEFAULT_T1};

    fn frac(n: u64, d: u64) -> Fraction {
        Fraction::new(n, d).unwrap()
    }

    fn closure(r: Fraction, s: Fraction) -> CommonPeriod {
        rational_closure(RadiusPair::Rational(r, s)).unwrap()
    }

    #[test]
    fn common_period_examples() {
        assert_eq!(closure(frac(1, 1), frac(1, 1)), CommonPeriod::TwoPiTimes(frac(1, 1)));
        assert_eq!(closure(frac(2, 1), frac(3, 1)), CommonPeriod::TwoPiTimes(frac(6, 1)));
        assert_eq!(closure(frac(1, 2), frac(1, 3)), CommonPeriod::TwoPiTimes(frac(1, 1)));
        assert_eq!(closure(frac(3, 4), frac(5, 6)), CommonPeriod::TwoPiTimes(frac(15, 2)));
        assert_eq!(rational_closure(RadiusPair::Irrational).unwrap(), CommonPeriod::Never);
        assert_eq!(CommonPeriod::Never.to_string(), "never closes");
    }

    #[test]
    fn zero_radius_is_rejected() {
        assert_eq!(Fraction::new(0, 3), Err(Error::NonPositiveRadius));
        assert_eq!(Fraction::new(3, 0), Err(Error::NonPositiveRadius));
    }

    #[test]
    fn huge_inputs_overflow_cleanly() {
        let p = frac(u64::MAX, 1);
        let q = frac(u64::MAX - 1, 1);
        assert_eq!(rational_closure(RadiusPair::Rational(p, q)), Err(Error::Overflow("common period")));
    }

    #[test]
    fn flat_metric_passes_everything() {
        let m = GluedMetric::new(CircleDiffeo::identity(), DEFAULT_T0, DEFAULT_T1).unwrap();
        let settings = VerifySettings {
            n_geodesics: 10,
            n_radial: 6,
            ..Default::default()
        };
        let report = verify(&m, &settings);
        assert!(report.passed(), "{report}");
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["all_or_none", "gluing", "leaf_equidistance", "radial_geodesic"]);
    }

    #[test]
    fn tampered_metric_fails_gluing_only() {
        let m = GluedMetric::new(CircleDiffeo::semicircle_bump(0.3).unwrap(), DEFAULT_T0, DEFAULT_T1)
            .unwrap()
            .with_psi1_override(crate::metric::VerticalScale::Constant(1.0))
            .unwrap();
        let g = gluing_check(&m, 720, 8);
        assert!(!g.passed && g.residual > 0.1);
    }

    #[test]
    fn leaf_distances_are_exact() {
        let m = GluedMetric::new(CircleDiffeo::semicircle_bump(0.3).unwrap(), DEFAULT_T0, DEFAULT_T1).unwrap();
        let c = leaf_equidistance_check(&m, 0.2, 0.7, 90);
        assert!(c.passed, "{c:?}");
        assert!(!leaf_equidistance_check(&m, 0.7, 0.2, 4).passed);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn fraction() -> impl Strategy<Value = Fraction> {
            (1u64..10_000, 1u64..10_000).prop_map(|(n, d)| frac(n, d))
        }

        proptest! {
            #[test]
            fn closure_is_symmetric(r in fraction(), s in fraction()) {
                prop_assert_eq!(closure(r, s), closure(s, r));
            }

            #[test]
            fn closure_is_homogeneous(r in fraction(), s in fraction(), c in fraction()) {
                let scaled = closure(r.scale(c).unwrap(), s.scale(c).unwrap());
                let CommonPeriod::TwoPiTimes(base) = closure(r, s) else { unreachable!() };
                prop_assert_eq!(scaled, CommonPeriod::TwoPiTimes(base.scale(c).unwrap()));
            }

            #[test]
            fn closure_is_a_common_multiple(r in fraction(), s in fraction()) {
                let CommonPeriod::TwoPiTimes(l) = closure(r, s) else { unreachable!() };
                // l / r and l / s are integers
                for x in [r, s] {
                    let q = u128::from(l.num()) * u128::from(x.den());
                    let d = u128::from(l.den()) * u128::from(x.num());
                    prop_assert_eq!(q % d, 0);
                }
            }
        }
    }
}
