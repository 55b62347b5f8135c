//! Time integration of the model: fixed-step RK4 and an adaptive embedded
//! Dormand-Prince 5(4) pair, with nonnegativity handling and
//! extinction/convergence event detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derivatives, Derivative, ModelParams, State};

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Rk4Fixed,
    AdaptiveRk45,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Method::Rk4Fixed),
            "rk45" | "adaptive" => Ok(Method::AdaptiveRk45),
            other => Err(Error::Parse(format!("unknown method `{other}` (rk4 | rk45)"))),
        }
    }
}

/// Integrator settings. The defaults give desk-scale runtimes on the
/// reference parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4; initial step for the adaptive method.
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub max_steps: usize,
    /// A species below this level is deemed extinct.
    pub extinction_threshold: f64,
    /// State-change and derivative-norm tolerance for steady-state detection.
    pub convergence_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveRk45,
            dt: 0.01,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            t_end: 500.0,
            max_steps: 10_000_000,
            extinction_threshold: 1e-6,
            // must sit above the integrator's own noise floor
            // (~rel_tol * |state|), or the steady-state check can never fire
            convergence_tol: 1e-7,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.convergence_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if !(self.extinction_threshold > 0.0) {
            return Err(Error::InvalidConfig("extinction_threshold must be positive".into()));
        }
        Ok(())
    }
}

/// Things that can happen along a trajectory. The last event of a
/// trajectory is its terminal event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    PreyExtinct,
    PredatorExtinct,
    BothExtinct,
    ConvergedToSteadyState,
    HorizonReached,
    StepLimit,
    /// The adaptive controller needed a step below 1e-14; the trajectory
    /// is returned up to this point.
    StepUnderflow,
}

impl EventKind {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, EventKind::PreyExtinct | EventKind::PredatorExtinct)
    }
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EventKind::PreyExtinct => "prey-extinct",
            EventKind::PredatorExtinct => "predator-extinct",
            EventKind::BothExtinct => "both-extinct",
            EventKind::ConvergedToSteadyState => "converged",
            EventKind::HorizonReached => "horizon-reached",
            EventKind::StepLimit => "step-limit",
            EventKind::StepUnderflow => "step-underflow",
        };
        f.write_str(s)
    }
}

/// A recorded integration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub events: Vec<(f64, EventKind)>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Steps where a sub-1e-12 retry forced a clamp of a negative component.
    pub clamped_steps: usize,
    /// Echo of the configuration that produced this run.
    pub config: IntegratorConfig,
}

impl Trajectory {
    pub fn terminal_event(&self) -> Option<(f64, EventKind)> {
        self.events.last().copied()
    }

    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial time")
    }

    /// Linear interpolation between recorded samples; clamps outside the
    /// recorded range.
    pub fn state_at(&self, t: f64) -> State {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => self.states[i],
            Err(0) => self.states[0],
            Err(i) if i >= self.times.len() => *self.states.last().unwrap(),
            Err(i) => {
                let (t0, t1) = (self.times[i - 1], self.times[i]);
                let (s0, s1) = (self.states[i - 1], self.states[i]);
                let w = (t - t0) / (t1 - t0);
                State { u: s0.u + w * (s1.u - s0.u), v: s0.v + w * (s1.v - s0.v) }
            }
        }
    }
}

fn rk4_raw(state: &State, dt: f64, params: &ModelParams) -> (f64, f64) {
    let f = |u: f64, v: f64| derivatives(&State { u: u.max(0.0), v: v.max(0.0) }, params);
    let k1 = f(state.u, state.v);
    let k2 = f(state.u + 0.5 * dt * k1.du_dt, state.v + 0.5 * dt * k1.dv_dt);
    let k3 = f(state.u + 0.5 * dt * k2.du_dt, state.v + 0.5 * dt * k2.dv_dt);
    let k4 = f(state.u + dt * k3.du_dt, state.v + dt * k3.dv_dt);
    (
        state.u + dt / 6.0 * (k1.du_dt + 2.0 * k2.du_dt + 2.0 * k3.du_dt + k4.du_dt),
        state.v + dt / 6.0 * (k1.dv_dt + 2.0 * k2.dv_dt + 2.0 * k3.dv_dt + k4.dv_dt),
    )
}

/// One classical 4-stage Runge-Kutta step. Negative components of the
/// result are clamped to zero.
pub fn step_rk4(state: &State, dt: f64, params: &ModelParams) -> Result<State> {
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    let (u, v) = rk4_raw(state, dt, params);
    if !u.is_finite() || !v.is_finite() {
        return Err(Error::NonFinite { u: state.u, v: state.v });
    }
    Ok(State { u: u.max(0.0), v: v.max(0.0) })
}

// Dormand-Prince 5(4) tableau. The field is autonomous, so stage times
// are not needed.
const DP_A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Fifth-order solution plus a scaled error estimate for one trial step.
fn dp45_step(state: &State, dt: f64, params: &ModelParams, cfg: &IntegratorConfig) -> (State, f64) {
    let f = |u: f64, v: f64| derivatives(&State { u: u.max(0.0), v: v.max(0.0) }, params);
    let mut k: [Derivative; 7] = [Derivative { du_dt: 0.0, dv_dt: 0.0 }; 7];
    k[0] = f(state.u, state.v);
    for i in 1..7 {
        let mut du = 0.0;
        let mut dv = 0.0;
        let row = &DP_A[i - 1];
        for (j, kj) in k.iter().enumerate().take(i) {
            du += row[j] * kj.du_dt;
            dv += row[j] * kj.dv_dt;
        }
        k[i] = f(state.u + dt * du, state.v + dt * dv);
    }
    let mut u5 = state.u;
    let mut v5 = state.v;
    let mut eu = 0.0;
    let mut ev = 0.0;
    for i in 0..7 {
        u5 += dt * DP_B5[i] * k[i].du_dt;
        v5 += dt * DP_B5[i] * k[i].dv_dt;
        eu += dt * (DP_B5[i] - DP_B4[i]) * k[i].du_dt;
        ev += dt * (DP_B5[i] - DP_B4[i]) * k[i].dv_dt;
    }
    let su = cfg.abs_tol + cfg.rel_tol * state.u.abs().max(u5.abs());
    let sv = cfg.abs_tol + cfg.rel_tol * state.v.abs().max(v5.abs());
    let err = (0.5 * ((eu / su).powi(2) + (ev / sv).powi(2))).sqrt();
    (State { u: u5, v: v5 }, err)
}

struct Recorder {
    times: Vec<f64>,
    states: Vec<State>,
    events: Vec<(f64, EventKind)>,
    prey_noted: bool,
    predator_noted: bool,
}

impl Recorder {
    fn new(t0: f64, init: State) -> Self {
        Self {
            times: vec![t0],
            states: vec![init],
            events: Vec::new(),
            prey_noted: false,
            predator_noted: false,
        }
    }

    fn push(&mut self, t: f64, s: State) {
        self.times.push(t);
        self.states.push(s);
    }

    fn note_single_extinctions(&mut self, t: f64, s: &State, threshold: f64) {
        if s.u < threshold && !self.prey_noted {
            self.events.push((t, EventKind::PreyExtinct));
            self.prey_noted = true;
        }
        if s.v < threshold && !self.predator_noted {
            self.events.push((t, EventKind::PredatorExtinct));
            self.predator_noted = true;
        }
    }

    fn note_extinctions(&mut self, t: f64, s: &State, threshold: f64) -> bool {
        self.note_single_extinctions(t, s, threshold);
        if s.u < threshold && s.v < threshold {
            self.events.push((t, EventKind::BothExtinct));
            return true;
        }
        false
    }
}

/// Integrate from `init` until the horizon, convergence, extinction of both
/// species, the step cap, or step underflow. All outcomes, including
/// underflow, return the trajectory; the terminal event says which.
pub fn simulate(init: State, params: &ModelParams, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut rec = Recorder::new(0.0, init);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut clamped = 0usize;
    let mut t = 0.0;
    let mut state = init;
    let mut dt = cfg.dt;

    let finish = |rec: Recorder, accepted, rejected, clamped| Trajectory {
        times: rec.times,
        states: rec.states,
        events: rec.events,
        accepted_steps: accepted,
        rejected_steps: rejected,
        clamped_steps: clamped,
        config: *cfg,
    };

    // already at rest (covers the origin) or already extinct
    rec.note_single_extinctions(0.0, &state, cfg.extinction_threshold);
    if derivatives(&state, params).norm() < cfg.convergence_tol {
        rec.events.push((0.0, EventKind::ConvergedToSteadyState));
        return Ok(finish(rec, 0, 0, 0));
    }
    if state.u < cfg.extinction_threshold && state.v < cfg.extinction_threshold {
        rec.events.push((0.0, EventKind::BothExtinct));
        return Ok(finish(rec, 0, 0, 0));
    }

    while t < cfg.t_end {
        if accepted + rejected >= cfg.max_steps {
            rec.events.push((t, EventKind::StepLimit));
            return Ok(finish(rec, accepted, rejected, clamped));
        }
        let step = dt.min(cfg.t_end - t);
        if step < 1e-14 {
            rec.events.push((t, EventKind::StepUnderflow));
            return Ok(finish(rec, accepted, rejected, clamped));
        }

        let (next, taken, accept) = match cfg.method {
            Method::Rk4Fixed => {
                // shrink the step while it would leave the quadrant
                let mut h = step;
                loop {
                    let (u, v) = rk4_raw(&state, h, params);
                    if !u.is_finite() || !v.is_finite() {
                        return Err(Error::NonFinite { u: state.u, v: state.v });
                    }
                    if u >= 0.0 && v >= 0.0 {
                        break (State { u, v }, h, true);
                    }
                    if h < 1e-12 {
                        clamped += 1;
                        break (State { u: u.max(0.0), v: v.max(0.0) }, h, true);
                    }
                    h *= 0.5;
                }
            }
            Method::AdaptiveRk45 => {
                let (next, err) = dp45_step(&state, step, params, cfg);
                if !next.u.is_finite() || !next.v.is_finite() {
                    return Err(Error::NonFinite { u: state.u, v: state.v });
                }
                let negative = next.u < 0.0 || next.v < 0.0;
                if err <= 1.0 && !negative {
                    let grow = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
                    let taken = step;
                    dt = step * grow;
                    (next, taken, true)
                } else if negative && step < 1e-12 {
                    clamped += 1;
                    (State { u: next.u.max(0.0), v: next.v.max(0.0) }, step, true)
                } else {
                    let shrink = if negative {
                        0.5
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 0.9)
                    };
                    dt = step * shrink;
                    (state, 0.0, false)
                }
            }
        };

        if !accept {
            rejected += 1;
            continue;
        }

        accepted += 1;
        t += taken;
        state = next;
        rec.push(t, state);

        if rec.note_extinctions(t, &state, cfg.extinction_threshold) {
            return Ok(finish(rec, accepted, rejected, clamped));
        }

        // two-signal steady-state check: slow drift over one time unit and
        // a small instantaneous rate
        if t >= 1.0 && derivatives(&state, params).norm() < cfg.convergence_tol {
            let past = interp_state(&rec.times, &rec.states, t - 1.0);
            if past.distance(&state) < cfg.convergence_tol {
                rec.events.push((t, EventKind::ConvergedToSteadyState));
                return Ok(finish(rec, accepted, rejected, clamped));
            }
        }
    }

    rec.events.push((t, EventKind::HorizonReached));
    Ok(finish(rec, accepted, rejected, clamped))
}

fn interp_state(times: &[f64], states: &[State], t: f64) -> State {
    match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => states[i],
        Err(0) => states[0],
        Err(i) if i >= times.len() => *states.last().unwrap(),
        Err(i) => {
            let (t0, t1) = (times[i - 1], times[i]);
            let (s0, s1) = (states[i - 1], states[i]);
            let w = (t - t0) / (t1 - t0);
            State { u: s0.u + w * (s1.u - s0.u), v: s0.v + w * (s1.v - s0.v) }
        }
    }
}

/// Long-run outcome of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fate {
    CoexistenceEquilibrium,
    PreyOnlyEquilibrium,
    Extinction,
    Oscillatory,
    Undetermined,
}

impl std::fmt::Display for Fate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Fate::CoexistenceEquilibrium => "coexistence-equilibrium",
            Fate::PreyOnlyEquilibrium => "prey-only-equilibrium",
            Fate::Extinction => "extinction",
            Fate::Oscillatory => "oscillatory",
            Fate::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

/// Classify a finished trajectory.
pub fn classify_fate(trajectory: &Trajectory, cfg: &IntegratorConfig) -> Fate {
    let end = trajectory.final_state();
    let thr = cfg.extinction_threshold;
    let terminal = trajectory.terminal_event().map(|(_, k)| k);

    if terminal == Some(EventKind::BothExtinct) || (end.u < thr && end.v < thr) {
        return Fate::Extinction;
    }
    if terminal == Some(EventKind::ConvergedToSteadyState) {
        return match (end.u >= thr, end.v >= thr) {
            (true, true) => Fate::CoexistenceEquilibrium,
            (true, false) => Fate::PreyOnlyEquilibrium,
            _ => Fate::Undetermined,
        };
    }
    if terminal == Some(EventKind::HorizonReached) {
        // bounded non-convergent recurrence in the tail?
        let t_tail = trajectory.final_time() * 0.8;
        let idx = trajectory.times.partition_point(|&t| t < t_tail);
        let tail = &trajectory.states[idx..];
        if tail.len() >= 4 {
            let extrema = count_extrema(tail.iter().map(|s| s.u));
            let (umin, umax) = min_max(tail.iter().map(|s| s.u));
            let (vmin, vmax) = min_max(tail.iter().map(|s| s.v));
            let amplitude = (umax - umin).max(vmax - vmin);
            if extrema >= 3 && amplitude > 10.0 * cfg.convergence_tol {
                return Fate::Oscillatory;
            }
        }
    }
    Fate::Undetermined
}

fn count_extrema(values: impl Iterator<Item = f64>) -> usize {
    let v: Vec<f64> = values.collect();
    let mut n = 0;
    for w in v.windows(3) {
        let d1 = w[1] - w[0];
        let d2 = w[2] - w[1];
        if d1 * d2 < 0.0 {
            n += 1;
        }
    }
    n
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Empirical origin classification: trajectories from a ring of radius
/// 1e-3 around the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OriginBehavior {
    Attracting,
    Repelling,
    Mixed,
}

impl std::fmt::Display for OriginBehavior {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OriginBehavior::Attracting => "attracting (empirical)",
            OriginBehavior::Repelling => "repelling (empirical)",
            OriginBehavior::Mixed => "mixed (empirical)",
        };
        f.write_str(s)
    }
}

/// The Jacobian has no limit at the origin; classify it the way the
/// numerics do: seed a ring of radius 1e-3 and watch where trajectories go.
pub fn classify_origin_empirical(params: &ModelParams, cfg: &IntegratorConfig) -> Result<OriginBehavior> {
    const RING: usize = 16;
    const RADIUS: f64 = 1e-3;
    let mut cfg = *cfg;
    cfg.t_end = cfg.t_end.min(100.0);
    let mut toward = 0usize;
    let mut away = 0usize;
    for i in 0..RING {
        let angle = std::f64::consts::FRAC_PI_2 * (i as f64 + 0.5) / RING as f64;
        let init = State { u: RADIUS * angle.cos(), v: RADIUS * angle.sin() };
        let traj = simulate(init, params, &cfg)?;
        let end = traj.final_state();
        let r_end = end.u.hypot(end.v);
        if r_end < RADIUS * 0.1 {
            toward += 1;
        } else if r_end > RADIUS * 10.0 {
            away += 1;
        }
    }
    Ok(if toward == RING {
        OriginBehavior::Attracting
    } else if away == RING {
        OriginBehavior::Repelling
    } else {
        OriginBehavior::Mixed
    })
}
