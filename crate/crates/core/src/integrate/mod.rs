//! Adaptive integration of the Fowler systems with dense output and events.
//!
//! Trajectories are integrated either in the plain `(x, y)` coordinates or as
//! a deviation `(x - x*, y - y*)` from a closed-form homoclinic of the frozen
//! system at `K(-inf)`. In the second frame the tiny separation from the
//! homoclinic that decides whether and when a regular solution crosses `x = 0`
//! is carried with full relative precision. Both frames carry the energy as a
//! third component, `dH/dt = K'(t)|x|^q/q`.

pub mod dopri;

use serde::{Deserialize, Serialize};

use crate::dynsys::{energy, energy_near_level, equilibrium, Drive, FrozenSpec, Homoclinic};
use crate::error::{Error, Result};
use crate::fowler::{phi, powdiff, PhaseState};
use crate::params::ProblemParams;
use dopri::{Dense, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Length of the integration window in log-radius units after launch.
    pub t_budget: f64,
    pub overflow_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rel_tol: 1e-10, abs_tol: 1e-12, max_step: 1.0, t_budget: 60.0, overflow_guard: 1e12 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.rel_tol) || !ok(self.abs_tol) || !ok(self.max_step) || !ok(self.t_budget) || !ok(self.overflow_guard) {
            return Err(Error::Config(format!("integrator settings must be positive and finite: {self:?}")));
        }
        Ok(())
    }
}

/// Coordinates in which the integrator state is expressed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    Direct,
    Deviation(Homoclinic),
}

impl Frame {
    /// Absolute `(x, y)` from a frame state.
    #[inline]
    pub fn absolute(&self, t: f64, raw: &State) -> (f64, f64) {
        match self {
            Frame::Direct => (raw[0], raw[1]),
            Frame::Deviation(h) => {
                let (xs, ys) = h.state(t);
                (xs + raw[0], ys + raw[1])
            }
        }
    }

    fn rhs(&self, params: &ProblemParams, drive: &Drive, t: f64, raw: &State) -> State {
        let (a, q, m) = (params.alpha, params.q, params.y_exponent());
        match self {
            Frame::Direct => {
                let (k, kdot) = drive.k(t);
                let (x, y) = (raw[0], raw[1]);
                [a * x + phi(m, y), -a * y - k * phi(q - 1.0, x), kdot * x.abs().powf(q) / q]
            }
            Frame::Deviation(h) => {
                let (xs, ys) = h.state(t);
                let (dx, dy) = (raw[0], raw[1]);
                let x = xs + dx;
                let excess = drive.excess_over(t, h.k);
                let kdot = drive.k(t).1;
                let fx = phi(q - 1.0, x);
                [
                    a * dx + powdiff(m, ys, dy),
                    -a * dy - h.k * powdiff(q - 1.0, xs, dx) - excess * fx,
                    kdot * x.abs().powf(q) / q,
                ]
            }
        }
    }

    /// Energy `H(x, y; t)` computed from the frame state.
    pub fn energy(&self, params: &ProblemParams, drive: &Drive, t: f64, raw: &State) -> f64 {
        match self {
            Frame::Direct => energy(params, drive.k(t).0, raw[0], raw[1]),
            Frame::Deviation(h) => {
                energy_near_level(params, h.k, drive.excess_over(t, h.k), h.state(t), (raw[0], raw[1]))
            }
        }
    }

    fn error_norm(&self, cfg: &IntegratorConfig, y0: &State, y1: &State, err: &State) -> f64 {
        match self {
            Frame::Direct => {
                let mut acc = 0.0;
                for i in 0..2 {
                    let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
                    acc += (err[i] / sc).powi(2);
                }
                (acc / 2.0).sqrt()
            }
            Frame::Deviation(_) => {
                let size = y0[0].abs().max(y0[1].abs()).max(y1[0].abs()).max(y1[1].abs());
                let sc = 1e-300 + cfg.rel_tol * size;
                err[0].abs().max(err[1].abs()) / sc
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EventKind {
    /// `x` reaches zero from above.
    XCross,
    /// `y` reaches `-a` from below on the segment `0 <= x <= a^{1/(p-1)}/alpha`.
    YLevel { a: f64 },
    /// `x'` becomes non-negative.
    RegionExit,
    Divergence,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub t_event: f64,
    pub state: PhaseState,
}

/// Which events to localize. `XCross` and `RegionExit` end the integration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Watch {
    pub x_cross: bool,
    pub y_level: Option<f64>,
    pub stop_at_y_level: bool,
    pub region_exit: bool,
}

impl Watch {
    pub fn crossing() -> Self {
        Watch { x_cross: true, ..Watch::default() }
    }

    pub fn none() -> Self {
        Watch::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReading {
    pub t: f64,
    /// `H` evaluated from the state.
    pub h: f64,
    /// `H` carried by quadrature of its derivative.
    pub h_tracked: f64,
    /// `K'(t)|x|^q/q`.
    pub dh_dt_identity: f64,
}

/// An integrated trajectory with its dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub events: Vec<Event>,
    pub energy_trace: Vec<EnergyReading>,
    pub steps_rejected: usize,
    params: ProblemParams,
    drive: Drive,
    frame: Frame,
    raw: Vec<State>,
    dense: Vec<Dense>,
}

impl Trajectory {
    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().unwrap().t
    }

    /// Frame state at the samples (deviation and tracked energy).
    pub fn raw_samples(&self) -> &[State] {
        &self.raw
    }

    /// Frame state from the dense output, `None` outside the integrated range.
    pub fn raw_at(&self, t: f64) -> Option<State> {
        if !(t >= self.t_start() && t <= self.t_end()) {
            return None;
        }
        if self.dense.is_empty() {
            return Some(self.raw[0]);
        }
        let i = self.dense.partition_point(|d| d.t0 <= t).saturating_sub(1);
        Some(self.dense[i].eval(t))
    }

    pub fn state_at(&self, t: f64) -> Option<PhaseState> {
        let raw = self.raw_at(t)?;
        let (x, y) = self.frame.absolute(t, &raw);
        Some(PhaseState { t, x, y })
    }

    /// `H(x(t), y(t); t)` from the state.
    pub fn energy_at(&self, t: f64) -> Option<f64> {
        let raw = self.raw_at(t)?;
        Some(self.frame.energy(&self.params, &self.drive, t, &raw))
    }

    /// Energy carried by quadrature.
    pub fn tracked_energy_at(&self, t: f64) -> Option<f64> {
        self.raw_at(t).map(|r| r[2])
    }

    pub fn final_event(&self) -> Option<&Event> {
        self.events.last()
    }

    pub fn event(&self, pred: impl Fn(&EventKind) -> bool) -> Option<&Event> {
        self.events.iter().find(|e| pred(&e.kind))
    }

    pub fn x_cross(&self) -> Option<&Event> {
        self.event(|k| matches!(k, EventKind::XCross))
    }

    pub fn y_level(&self) -> Option<&Event> {
        self.event(|k| matches!(k, EventKind::YLevel { .. }))
    }
}

fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, crossed: impl Fn(f64) -> bool) -> f64 {
    // crossed(g(lo)) is false and crossed(g(hi)) is true
    for _ in 0..200 {
        if hi - lo <= 1e-13 * lo.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if crossed(g(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

const PROBES: usize = 8;

struct StepEvents {
    terminal: Option<(f64, EventKind)>,
    y_level: Option<f64>,
}

fn scan_step(params: &ProblemParams, frame: &Frame, dense: &Dense, watch: &Watch, want_y_level: bool) -> StepEvents {
    let abs_at = |t: f64| frame.absolute(t, &dense.eval(t));
    let times: Vec<f64> = (0..=PROBES).map(|j| if j == PROBES { dense.t1() } else { dense.t0 + dense.h * j as f64 / PROBES as f64 }).collect();
    let pts: Vec<(f64, f64)> = times.iter().map(|&t| abs_at(t)).collect();
    let xdot = |(x, y): (f64, f64)| params.alpha * x + phi(params.y_exponent(), y);
    let mut terminal: Option<(f64, EventKind)> = None;
    let consider = |t: f64, kind: EventKind, terminal: &mut Option<(f64, EventKind)>| {
        if terminal.is_none_or(|(tt, _)| t < tt) {
            *terminal = Some((t, kind));
        }
    };
    for j in 1..=PROBES {
        if watch.x_cross && pts[j - 1].0 > 0.0 && pts[j].0 <= 0.0 {
            let t = bisect(|t| abs_at(t).0, times[j - 1], times[j], |g| g <= 0.0);
            consider(t, EventKind::XCross, &mut terminal);
            break;
        }
    }
    if watch.region_exit {
        for j in 1..=PROBES {
            if xdot(pts[j - 1]) < 0.0 && xdot(pts[j]) >= 0.0 {
                let t = bisect(|t| xdot(abs_at(t)), times[j - 1], times[j], |g| g >= 0.0);
                consider(t, EventKind::RegionExit, &mut terminal);
                break;
            }
        }
    }
    let mut y_level = None;
    if let (Some(a), true) = (watch.y_level, want_y_level) {
        let x_max = a.powf(params.y_exponent()) / params.alpha;
        for j in 1..=PROBES {
            if pts[j - 1].1 + a < 0.0 && pts[j].1 + a >= 0.0 {
                let t = bisect(|t| abs_at(t).1 + a, times[j - 1], times[j], |g| g >= 0.0);
                let x = abs_at(t).0;
                if (0.0..=x_max).contains(&x) && terminal.is_none_or(|(tt, _)| t <= tt) {
                    y_level = Some(t);
                    break;
                }
            }
        }
        if let (Some(t), true) = (y_level, watch.stop_at_y_level) {
            consider(t, EventKind::YLevel { a }, &mut terminal);
        }
    }
    StepEvents { terminal, y_level }
}

/// Integrates from the frame state `raw0` at `t0` until a terminal event or
/// the end of the budget window.
pub fn integrate(
    params: &ProblemParams,
    drive: &Drive,
    frame: &Frame,
    t0: f64,
    raw0: State,
    cfg: &IntegratorConfig,
    watch: &Watch,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t0.is_finite() && raw0.iter().all(|v| v.is_finite())) {
        return Err(Error::Argument(format!("launch state {raw0:?} at t = {t0} is not finite")));
    }
    let f = |t: f64, y: &State| frame.rhs(params, drive, t, y);
    let reading = |t: f64, raw: &State| {
        let (x, _) = frame.absolute(t, raw);
        EnergyReading {
            t,
            h: frame.energy(params, drive, t, raw),
            h_tracked: raw[2],
            dh_dt_identity: drive.k(t).1 * x.abs().powf(params.q) / params.q,
        }
    };
    let phase = |t: f64, raw: &State| {
        let (x, y) = frame.absolute(t, raw);
        PhaseState { t, x, y }
    };

    let mut traj = Trajectory {
        samples: vec![phase(t0, &raw0)],
        events: Vec::new(),
        energy_trace: vec![reading(t0, &raw0)],
        steps_rejected: 0,
        params: *params,
        drive: drive.clone(),
        frame: *frame,
        raw: vec![raw0],
        dense: Vec::new(),
    };

    let t_end = t0 + cfg.t_budget;
    let mut t = t0;
    let mut y = raw0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(frame, cfg, &y, &k1);
    let mut facold: f64 = 1e-4;
    let mut y_level_found = false;
    let mut accepted = 0usize;

    loop {
        if t >= t_end {
            let s = phase(t, &y);
            traj.events.push(Event { kind: EventKind::BudgetExceeded, t_event: t, state: s });
            break;
        }
        let last = t + h >= t_end;
        let h_try = if last { t_end - t } else { h.min(cfg.max_step) };
        if h_try <= 1e-14 * t.abs().max(1.0) || accepted > 5_000_000 {
            let s = phase(t, &y);
            traj.events.push(Event { kind: EventKind::Divergence, t_event: t, state: s });
            break;
        }
        let out = dopri::step(&f, t, &y, &k1, h_try);
        let err = frame.error_norm(cfg, &y, &out.y1, &out.err);
        if !err.is_finite() || !out.y1.iter().all(|v| v.is_finite()) {
            traj.steps_rejected += 1;
            h = 0.25 * h_try;
            continue;
        }
        let fac11 = err.powf(0.17);
        if err > 1.0 {
            traj.steps_rejected += 1;
            h = h_try / (fac11 / 0.9).min(5.0);
            continue;
        }
        if params.p < 2.0 && h_try > 1e-3 {
            let ya = frame.absolute(t, &y).1;
            let yb = frame.absolute(t + h_try, &out.y1).1;
            if ya * yb < 0.0 {
                traj.steps_rejected += 1;
                h = 0.25 * h_try;
                continue;
            }
        }
        let fac = (fac11 / facold.powf(0.04) / 0.9).clamp(0.1, 5.0);
        let h_next = h_try / fac;
        facold = err.max(1e-4);
        accepted += 1;

        let dense = out.dense;
        let ev = scan_step(params, frame, &dense, watch, !y_level_found);
        if let (Some(ty), Some(a)) = (ev.y_level, watch.y_level) {
            y_level_found = true;
            let s = phase(ty, &dense.eval(ty));
            traj.events.push(Event { kind: EventKind::YLevel { a }, t_event: ty, state: s });
        }
        traj.dense.push(dense);
        if let Some((te, kind)) = ev.terminal {
            if !matches!(kind, EventKind::YLevel { .. }) {
                let raw = dense.eval(te);
                let s = phase(te, &raw);
                traj.samples.push(s);
                traj.raw.push(raw);
                traj.energy_trace.push(reading(te, &raw));
                traj.events.push(Event { kind, t_event: te, state: s });
            } else {
                let raw = dense.eval(te);
                traj.samples.push(phase(te, &raw));
                traj.raw.push(raw);
                traj.energy_trace.push(reading(te, &raw));
            }
            break;
        }
        t = if last { t_end } else { t + h_try };
        y = out.y1;
        k1 = out.k7;
        let s = phase(t, &y);
        traj.samples.push(s);
        traj.raw.push(y);
        traj.energy_trace.push(reading(t, &y));
        if !(s.x.abs() <= cfg.overflow_guard && s.y.abs() <= cfg.overflow_guard) {
            traj.events.push(Event { kind: EventKind::Divergence, t_event: t, state: s });
            break;
        }
        h = h_next;
    }
    Ok(traj)
}

fn initial_step(frame: &Frame, cfg: &IntegratorConfig, y: &State, f0: &State) -> f64 {
    let (ny, nf) = match frame {
        Frame::Direct => {
            let sc = |i: usize| cfg.abs_tol + cfg.rel_tol * y[i].abs();
            (
                ((y[0] / sc(0)).powi(2) + (y[1] / sc(1)).powi(2)).sqrt(),
                ((f0[0] / sc(0)).powi(2) + (f0[1] / sc(1)).powi(2)).sqrt(),
            )
        }
        Frame::Deviation(_) => (y[0].abs().max(y[1].abs()), f0[0].abs().max(f0[1].abs())),
    };
    let h = if ny > 1e-300 && nf > 1e-300 { 0.01 * ny / nf } else { 1e-4 };
    h.clamp(1e-8, cfg.max_step)
}

/// Integrates in the plain frame from a phase state, with the energy
/// initialized from the state.
pub fn integrate_direct(
    params: &ProblemParams,
    drive: &Drive,
    launch: PhaseState,
    cfg: &IntegratorConfig,
    watch: &Watch,
) -> Result<Trajectory> {
    let h0 = energy(params, drive.k(launch.t).0, launch.x, launch.y);
    integrate(params, drive, &Frame::Direct, launch.t, [launch.x, launch.y, h0], cfg, watch)
}

/// First crossing of the segment `y = -a`, `0 <= x <= a^{1/(p-1)}/alpha`.
pub fn first_y_level_crossing(
    params: &ProblemParams,
    drive: &Drive,
    launch: PhaseState,
    a: f64,
    cfg: &IntegratorConfig,
) -> Result<Event> {
    let base = FrozenSpec::new(drive.base())?;
    let (_, ey) = equilibrium(params, &base);
    if !(a > 0.0 && a < ey.abs()) {
        return Err(Error::Precondition(format!("level a = {a} must lie in (0, |Ey| = {})", ey.abs())));
    }
    let watch = Watch { y_level: Some(a), stop_at_y_level: true, ..Watch::default() };
    let traj = integrate_direct(params, drive, launch, cfg, &watch)?;
    traj.y_level()
        .copied()
        .ok_or_else(|| Error::NotReached(format!("segment y = -{a} not reached within the budget")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kprofile::KProfile;
    use crate::params::make_params;

    fn n4p2() -> ProblemParams {
        make_params(4, 2.0).unwrap()
    }

    #[test]
    fn homoclinic_launch_tracks_closed_form() {
        let pr = n4p2();
        let drive = Drive::Profile(KProfile::constant(1.0).unwrap());
        let h = Homoclinic::new(&pr, 1.0, 1.0).unwrap();
        let (x0, y0) = h.state(-8.0);
        let cfg = IntegratorConfig { t_budget: 12.0, ..Default::default() };
        let tr = integrate_direct(&pr, &drive, PhaseState { t: -8.0, x: x0, y: y0 }, &cfg, &Watch::crossing()).unwrap();
        assert!(tr.x_cross().is_none());
        assert!(matches!(tr.final_event().unwrap().kind, EventKind::BudgetExceeded));
        assert!((tr.t_end() - 4.0).abs() < 1e-12);
        let mut sup: f64 = 0.0;
        for i in 0..=1200 {
            let t = -8.0 + 0.01 * i as f64;
            let s = tr.state_at(t).unwrap();
            sup = sup.max((s.x - h.x(t)).abs());
        }
        assert!(sup <= 1e-7, "sup deviation {sup}");
    }

    #[test]
    fn origin_stays_put() {
        let pr = n4p2();
        let drive = Drive::Profile(KProfile::power(1.0, 1.0, 2.0, vec![]).unwrap());
        let tr = integrate_direct(&pr, &drive, PhaseState { t: 0.0, x: 0.0, y: 0.0 }, &IntegratorConfig::default(), &Watch::crossing()).unwrap();
        assert!(matches!(tr.final_event().unwrap().kind, EventKind::BudgetExceeded));
        assert!(tr.samples.iter().all(|s| s.x == 0.0 && s.y == 0.0));
    }

    #[test]
    fn constant_k_conserves_energy() {
        let pr = n4p2();
        let drive = Drive::Profile(KProfile::constant(1.0).unwrap());
        // a periodic orbit inside the homoclinic loop
        let cfg = IntegratorConfig { t_budget: 20.0, ..Default::default() };
        let tr = integrate_direct(&pr, &drive, PhaseState { t: 0.0, x: 1.2, y: -1.0 }, &cfg, &Watch::crossing()).unwrap();
        let h0 = tr.energy_trace[0].h;
        let drift = tr.energy_trace.iter().map(|e| (e.h - h0).abs()).fold(0.0, f64::max);
        assert!(drift <= 1e-9 * 20.0, "drift {drift}");
    }

    #[test]
    fn x_cross_event_is_refined() {
        let pr = n4p2();
        let drive = Drive::Profile(KProfile::constant(1.0).unwrap());
        // outside the loop: positive energy, crosses x = 0
        let tr = integrate_direct(&pr, &drive, PhaseState { t: 0.0, x: 1.0, y: -2.0 }, &IntegratorConfig::default(), &Watch::crossing()).unwrap();
        let ev = tr.x_cross().unwrap();
        assert!(ev.state.x.abs() <= 1e-11);
        assert!(ev.state.y < 0.0);
        // reverse-time reproduction: classical RK4 backwards from the event state
        let f = |x: f64, y: f64| (x + y, -y - x * x * x);
        let (mut x, mut y) = (ev.state.x, ev.state.y);
        let h = -1e-4;
        for _ in 0..5000 {
            let k1 = f(x, y);
            let k2 = f(x + 0.5 * h * k1.0, y + 0.5 * h * k1.1);
            let k3 = f(x + 0.5 * h * k2.0, y + 0.5 * h * k2.1);
            let k4 = f(x + h * k3.0, y + h * k3.1);
            x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        let s = tr.state_at(ev.t_event - 0.5).unwrap();
        assert!((s.x - x).abs() < 1e-8 && (s.y - y).abs() < 1e-8);
    }

    #[test]
    fn y_level_segment_event() {
        let pr = n4p2();
        let drive = Drive::Profile(KProfile::constant(1.0).unwrap());
        let h = Homoclinic::new(&pr, 1.0, 1.0).unwrap();
        let (x0, y0) = h.state(-6.0);
        let ev = first_y_level_crossing(&pr, &drive, PhaseState { t: -6.0, x: x0, y: y0 }, 0.5, &IntegratorConfig::default()).unwrap();
        assert!((ev.state.y + 0.5).abs() <= 1e-11);
        assert!(ev.state.x >= 0.0 && ev.state.x <= 0.5);
        let want = h.y_level_time(0.5).unwrap();
        assert!((ev.t_event - want).abs() < 1e-7);
        assert!(matches!(
            first_y_level_crossing(&pr, &drive, PhaseState { t: -6.0, x: x0, y: y0 }, 1.0, &IntegratorConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn deviation_frame_agrees_with_direct_frame() {
        for &p in &[2.0, 1.5] {
            let pr = make_params(4, p).unwrap();
            let prof = KProfile::power(1.0, 1.0, 2.0, vec![]).unwrap();
            let drive = Drive::Profile(prof);
            let h = Homoclinic::new(&pr, 1.0, 1.0).unwrap();
            let t0 = h.apex_time() - 3.0;
            let (xs, ys) = h.state(t0);
            let (x0, y0) = (xs * 1.001, ys * 0.999);
            let cfg = IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
            let a = integrate_direct(&pr, &drive, PhaseState { t: t0, x: x0, y: y0 }, &cfg, &Watch::crossing()).unwrap();
            let h0 = a.energy_trace[0].h;
            let b = integrate(&pr, &drive, &Frame::Deviation(h), t0, [x0 - xs, y0 - ys, h0], &cfg, &Watch::crossing()).unwrap();
            let (ta, tb) = (a.x_cross().unwrap().t_event, b.x_cross().unwrap().t_event);
            assert!((ta - tb).abs() < 1e-8, "p={p}: {ta} vs {tb}");
            for i in 0..20 {
                let t = t0 + (ta - t0) * i as f64 / 20.0;
                let (sa, sb) = (a.state_at(t).unwrap(), b.state_at(t).unwrap());
                assert!((sa.x - sb.x).abs() < 1e-8 && (sa.y - sb.y).abs() < 1e-8);
                let (ea, eb) = (a.energy_at(t).unwrap(), b.energy_at(t).unwrap());
                assert!((ea - eb).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        let pr = n4p2();
        let drive = Drive::Profile(KProfile::constant(1.0).unwrap());
        let cfg = IntegratorConfig { rel_tol: -1.0, ..Default::default() };
        assert!(integrate_direct(&pr, &drive, PhaseState { t: 0.0, x: 1.0, y: 0.0 }, &cfg, &Watch::none()).is_err());
    }
}
