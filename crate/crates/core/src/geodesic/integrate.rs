use std::io::{self, Write};

use serde::Serialize;

use crate::angle::{circle_distance, normalize, Angle};
use crate::error::{Error, Result};
use crate::metric::{Chart, GluedMetric};

/// Initial data must have unit speed to this accuracy.
const UNIT_SPEED_TOL: f64 = 1e-9;
const MAX_EVENT_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicState {
    pub chart: Chart,
    pub t: f64,
    pub theta: f64,
    /// `dt/ds`
    pub vt: f64,
    /// `dθ/ds`
    pub vtheta: f64,
    pub s: f64,
}

impl GeodesicState {
    /// Unit-speed radial state; `outward` moves away from the center.
    pub fn radial(chart: Chart, t: f64, theta: Angle, outward: bool) -> Self {
        GeodesicState {
            chart,
            t,
            theta: theta.radians(),
            vt: if outward { 1.0 } else { -1.0 },
            vtheta: 0.0,
            s: 0.0,
        }
    }

    /// Unit-speed state whose velocity makes the angle `alpha` with the
    /// outward radial direction, measured in an orthonormal frame.
    pub fn with_heading(metric: &GluedMetric, chart: Chart, t: f64, theta: Angle, alpha: f64) -> Self {
        let phi = metric.warp_jet(chart, t, theta.radians()).0;
        GeodesicState {
            chart,
            t,
            theta: theta.radians(),
            vt: alpha.cos(),
            vtheta: alpha.sin() / phi,
            s: 0.0,
        }
    }

    /// `sqrt(vt² + φ² vθ²)`.
    pub fn speed(&self, metric: &GluedMetric) -> f64 {
        let phi = metric.warp_jet(self.chart, self.t, self.theta).0;
        (self.vt * self.vt + phi * phi * self.vtheta * self.vtheta).sqrt()
    }

    fn y(&self) -> [f64; 4] {
        [self.t, self.theta, self.vt, self.vtheta]
    }

    fn with_y(&self, y: [f64; 4], ds: f64) -> Self {
        GeodesicState {
            chart: self.chart,
            t: y[0],
            theta: y[1],
            vt: y[2],
            vtheta: y[3],
            s: self.s + ds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorSettings {
    pub ds: f64,
    pub s_max: f64,
    /// `|vθ|` below this counts as radial at the center.
    pub radial_tol: f64,
    /// Non-radial states closer than this to a center are an error.
    pub t_guard: f64,
    /// Events are located to this accuracy in arclength.
    pub event_tol: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            ds: 1e-3,
            s_max: 20.0,
            radial_tol: 1e-9,
            t_guard: 1e-6,
            event_tol: 1e-12,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return Err(Error::invalid("ds", "must be positive"));
        }
        if !(self.s_max >= 0.0 && self.s_max.is_finite()) {
            return Err(Error::invalid("s_max", "must be non-negative"));
        }
        if !(self.radial_tol > 0.0) {
            return Err(Error::invalid("radial_tol", "must be positive"));
        }
        if !(self.t_guard > 0.0 && self.t_guard < 1.0) {
            return Err(Error::invalid("t_guard", "must lie in (0, 1)"));
        }
        if !(self.event_tol > 0.0) {
            return Err(Error::invalid("event_tol", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    /// Crossed the gluing circle `t = 1`.
    Gluing { from: Chart, to: Chart },
    /// Passed through the center of `chart` along a radial line.
    CenterPassage { chart: Chart },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub s: f64,
    /// Chart-local angle just before the event.
    pub theta_before: f64,
    /// Chart-local angle just after; for a center passage this is the
    /// outgoing direction.
    pub theta_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    pub events: Vec<Event>,
}

impl Trajectory {
    /// Largest `|speed − 1|` along the trajectory.
    pub fn speed_drift(&self, metric: &GluedMetric) -> f64 {
        self.states
            .iter()
            .map(|s| (s.speed(metric) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// One record per line: `s,chart,t,theta,vt,vtheta`.
    pub fn write_records<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "s,chart,t,theta,vt,vtheta")?;
        for st in &self.states {
            writeln!(w, "{},{},{},{},{},{}", st.s, st.chart, st.t, st.theta, st.vt, st.vtheta)?;
        }
        Ok(())
    }
}

fn acceleration(metric: &GluedMetric, chart: Chart, y: [f64; 4]) -> [f64; 4] {
    let [t, theta, vt, vtheta] = y;
    if vtheta == 0.0 {
        // radial lines are geodesics; also avoids 0/0 at the center
        return [vt, 0.0, 0.0, 0.0];
    }
    let (phi, phi_t, phi_theta) = metric.warp_jet(chart, t, theta);
    [
        vt,
        vtheta,
        phi * phi_t * vtheta * vtheta,
        -vtheta * (2.0 * phi_t * vt + phi_theta * vtheta) / phi,
    ]
}

fn rk4(metric: &GluedMetric, state: &GeodesicState, h: f64) -> GeodesicState {
    let y = state.y();
    let f = |y: [f64; 4]| acceleration(metric, state.chart, y);
    let shift = |k: [f64; 4], c: f64| std::array::from_fn(|i| y[i] + c * k[i]);
    let k1 = f(y);
    let k2 = f(shift(k1, h / 2.0));
    let k3 = f(shift(k2, h / 2.0));
    let k4 = f(shift(k3, h));
    let next = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    state.with_y(next, h)
}

enum Boundary {
    Gluing,
    Center,
}

impl Boundary {
    fn level(&self) -> f64 {
        match self {
            Boundary::Gluing => 1.0,
            Boundary::Center => 0.0,
        }
    }
}

struct Stepper<'a> {
    metric: &'a GluedMetric,
    settings: &'a IntegratorSettings,
    events: Vec<Event>,
}

impl Stepper<'_> {
    fn is_radial(&self, state: &GeodesicState) -> bool {
        state.vtheta.abs() < self.settings.radial_tol
    }

    fn singular(&self, state: &GeodesicState) -> Error {
        Error::CenterSingularity {
            s: state.s,
            t: state.t,
            vtheta: state.vtheta,
        }
    }

    /// Advances by `h`, handling any chart events inside the step.
    fn advance(&mut self, mut state: GeodesicState, h: f64) -> Result<GeodesicState> {
        let mut remaining = h;
        loop {
            let next = rk4(self.metric, &state, remaining);
            if !next.y().iter().all(|v| v.is_finite()) {
                return Err(self.singular(&state));
            }
            let boundary = if next.t > 1.0 {
                Boundary::Gluing
            } else if next.t < 0.0 {
                if !self.is_radial(&state) {
                    return Err(self.singular(&next));
                }
                Boundary::Center
            } else {
                return Ok(next);
            };
            let (used, at) = self.locate(&state, remaining, &boundary)?;
            state = self.transition(at, &boundary)?;
            remaining -= used;
            if remaining <= 0.0 {
                return Ok(state);
            }
        }
    }

    /// Bisects for the step length at which `t` reaches the boundary.
    fn locate(&self, state: &GeodesicState, h: f64, boundary: &Boundary) -> Result<(f64, GeodesicState)> {
        let level = boundary.level();
        let side = |st: &GeodesicState| st.t - level;
        let start_sign = side(state);
        let inside_positive = matches!(boundary, Boundary::Center);
        // the pre-step state is on the interior side (or exactly on the boundary)
        if (inside_positive && start_sign < 0.0) || (!inside_positive && start_sign > 0.0) {
            return Err(Error::EventBisectionFailure {
                s: state.s,
                reason: "step starts outside the chart",
            });
        }
        let (mut lo, mut hi) = (0.0, h);
        let mut iterations = 0;
        while hi - lo > self.settings.event_tol {
            if iterations == MAX_EVENT_BISECTIONS {
                return Err(Error::EventBisectionFailure {
                    s: state.s,
                    reason: "no convergence",
                });
            }
            let mid = 0.5 * (lo + hi);
            let crossed = {
                let d = side(&rk4(self.metric, state, mid));
                if inside_positive {
                    d < 0.0
                } else {
                    d > 0.0
                }
            };
            if crossed {
                hi = mid;
            } else {
                lo = mid;
            }
            iterations += 1;
        }
        let mut at = rk4(self.metric, state, hi);
        at.t = level;
        Ok((hi, at))
    }

    fn transition(&mut self, at: GeodesicState, boundary: &Boundary) -> Result<GeodesicState> {
        let f = self.metric.diffeo();
        let mut next = at;
        let kind = match boundary {
            Boundary::Gluing => {
                match at.chart {
                    Chart::One => {
                        next.theta = normalize(f.lift(at.theta));
                        next.vtheta = f.lift_derivative(at.theta) * at.vtheta;
                    }
                    Chart::Two => {
                        let back = f.inverse_lift(at.theta)?;
                        next.theta = normalize(back);
                        next.vtheta = at.vtheta / f.lift_derivative(back);
                    }
                }
                next.chart = at.chart.other();
                EventKind::Gluing {
                    from: at.chart,
                    to: next.chart,
                }
            }
            Boundary::Center => {
                next.theta = Angle::new(at.theta).antipode().radians();
                EventKind::CenterPassage { chart: at.chart }
            }
        };
        next.vt = -at.vt;
        self.events.push(Event {
            kind,
            s: at.s,
            theta_before: normalize(at.theta),
            theta_after: next.theta,
        });
        Ok(next)
    }
}

/// Fixed-step RK4 for `t'' = φ φ_t vθ²`, `θ'' = −(2 φ_t/φ) vt vθ − (φ_θ/φ) vθ²`
/// with chart changes at the gluing circle and radial passages through the
/// centers. Events are located by bisection on the step length.
pub fn integrate(metric: &GluedMetric, init: GeodesicState, settings: &IntegratorSettings) -> Result<Trajectory> {
    settings.validate()?;
    if !(0.0..=1.0).contains(&init.t) {
        return Err(Error::invalid("t", "initial radius must lie in [0, 1]"));
    }
    let defect = (init.speed(metric) - 1.0).abs();
    if !(defect < UNIT_SPEED_TOL) {
        return Err(Error::invalid("init", format!("initial state is not unit speed (defect {defect:e})")));
    }
    let mut stepper = Stepper {
        metric,
        settings,
        events: Vec::new(),
    };
    let mut state = GeodesicState {
        theta: normalize(init.theta),
        ..init
    };
    let n_steps = (settings.s_max / settings.ds).ceil() as usize;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(state);
    let mut done = 0.0;
    for i in 0..n_steps {
        let target = (settings.ds * (i + 1) as f64).min(settings.s_max);
        let h = target - done;
        if h <= 0.0 {
            break;
        }
        state = stepper.advance(state, h)?;
        // keep arclength on the step grid instead of accumulating rounding
        state.s = init.s + target;
        state.theta = normalize(state.theta);
        done = target;
        if state.t < settings.t_guard && !stepper.is_radial(&state) {
            return Err(stepper.singular(&state));
        }
        states.push(state);
    }
    Ok(Trajectory {
        states,
        events: stepper.events,
    })
}

/// Arclength at which a radial geodesic launched from the chart-1 center
/// along `theta0` first comes back through that center heading along
/// `theta0` again, if it does so before `s_max`.
pub fn numerical_return_length(
    metric: &GluedMetric,
    theta0: Angle,
    direction_tol: f64,
    settings: &IntegratorSettings,
) -> Result<Option<f64>> {
    let init = GeodesicState::radial(Chart::One, 0.0, theta0, true);
    let traj = integrate(metric, init, settings)?;
    Ok(traj
        .events
        .iter()
        .find(|e| {
            e.kind == EventKind::CenterPassage { chart: Chart::One }
                && circle_distance(e.theta_after, theta0.radians()) < direction_tol
        })
        .map(|e| e.s))
}
