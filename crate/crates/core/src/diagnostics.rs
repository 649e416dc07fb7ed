//! Checks of the crossing-time, energy and barrier estimates on computed
//! trajectories. Nothing here feeds back into the solver.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynsys::{barrier_box, energy, equilibrium, gamma_apex, Drive, FrozenSpec, Homoclinic};
use crate::error::{Error, Result};
use crate::fowler::{local_init, phi, to_fowler, PhaseState};
use crate::integrate::{integrate, integrate_direct, EventKind, IntegratorConfig, Trajectory, Watch};
use crate::kprofile::{KProfile, ProfileKind};
use crate::params::ProblemParams;
use crate::shooting::{self, ShotConfig};
use crate::sweep::fit_slope;

/// Level `a(eps)` for a profile bounded by `k_bar`.
pub fn a_of_eps(params: &ProblemParams, eps: f64, k_bar: f64) -> Result<f64> {
    if !(eps > 0.0 && k_bar > 0.0) {
        return Err(Error::Argument(format!("need eps > 0 and K_bar > 0, got ({eps}, {k_bar})")));
    }
    let (p, q, a) = (params.p, params.q, params.alpha);
    Ok((a.powf(q) * eps / ((1.0 + eps) * k_bar)).powf((p - 1.0) / (q - p)))
}

/// `a(eps)` with the bound `K(-inf) + 1` of the truncated profile.
pub fn a_hat_of_eps(params: &ProblemParams, eps: f64, k_minus_inf: f64) -> Result<f64> {
    a_of_eps(params, eps, k_minus_inf + 1.0)
}

/// `ell*_p < q alpha / ((1 + eps)(p - 1))`.
pub fn ell0_holds(params: &ProblemParams, eps: f64) -> bool {
    params.ell_star < params.q * params.alpha / ((1.0 + eps) * (params.p - 1.0))
}

/// Initial value whose flat-region homoclinic meets the segment `y = -a` at `tau`.
pub fn d_for_tau(params: &ProblemParams, profile: &KProfile, a: f64, tau: f64) -> Result<f64> {
    let h = Homoclinic::new(params, profile.a(), 1.0)?;
    let t1 = h
        .y_level_time(a)
        .ok_or_else(|| Error::Precondition(format!("the homoclinic does not reach y = -{a}")))?;
    Ok((params.alpha * (t1 - tau)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentCrossingRecord {
    pub d: f64,
    pub tau: f64,
    pub a: f64,
    pub q: PhaseState,
    pub t_cross: f64,
    pub ry: f64,
    pub h_at_q: f64,
}

/// A shot through the segment with its trajectory.
#[derive(Debug, Clone)]
pub struct SegmentRun {
    pub d: f64,
    pub a: f64,
    pub tau: f64,
    pub q: PhaseState,
    pub h_at_q: f64,
    /// `(T, R_y)` when the shot crosses `x = 0`.
    pub crossing: Option<(f64, f64)>,
    pub trajectory: Trajectory,
}

impl SegmentRun {
    pub fn record(&self) -> Result<SegmentCrossingRecord> {
        let (t_cross, ry) = self
            .crossing
            .ok_or_else(|| Error::NotReached(format!("no zero of x after the segment for d = {}", self.d)))?;
        Ok(SegmentCrossingRecord { d: self.d, tau: self.tau, a: self.a, q: self.q, t_cross, ry, h_at_q: self.h_at_q })
    }
}

fn check_level(params: &ProblemParams, profile: &KProfile, a: f64) -> Result<()> {
    let (_, ey) = equilibrium(params, &FrozenSpec::new(profile.a())?);
    if !(a > 0.0 && a < ey.abs()) {
        return Err(Error::Precondition(format!("level a = {a} must lie in (0, |Ey| = {})", ey.abs())));
    }
    Ok(())
}

pub fn segment_run(params: &ProblemParams, profile: &KProfile, d: f64, a: f64, cfg: &ShotConfig) -> Result<SegmentRun> {
    check_level(params, profile, a)?;
    let watch = Watch { x_cross: true, y_level: Some(a), ..Watch::default() };
    let trajectory = shooting::trajectory(params, profile, d, cfg, &watch)?;
    let ev = *trajectory
        .y_level()
        .ok_or_else(|| Error::NotReached(format!("the shot with d = {d} misses the segment y = -{a}")))?;
    let h_at_q = trajectory.tracked_energy_at(ev.t_event).expect("event lies on the trajectory");
    let crossing = trajectory.x_cross().map(|e| (e.t_event, e.state.y));
    Ok(SegmentRun { d, a, tau: ev.t_event, q: ev.state, h_at_q, crossing, trajectory })
}

pub fn record_segment_crossing(params: &ProblemParams, profile: &KProfile, d: f64, a: f64, cfg: &ShotConfig) -> Result<SegmentCrossingRecord> {
    segment_run(params, profile, d, a, cfg)?.record()
}

/// Crossing of the frozen system started from `Q(tau, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrozenCrossing {
    pub t1: f64,
    pub ry1: f64,
    /// `|R1_y|` predicted by conservation of the frozen energy.
    pub ry1_from_energy: f64,
}

pub fn frozen_crossing(params: &ProblemParams, profile: &KProfile, run: &SegmentRun, cfg: &ShotConfig) -> Result<FrozenCrossing> {
    let traj = &run.trajectory;
    let mut raw = traj.raw_at(run.tau).expect("segment time lies on the trajectory");
    raw[2] = run.h_at_q;
    let drive = Drive::Frozen(FrozenSpec::at(profile, run.tau));
    let frozen = integrate(params, &drive, traj.frame(), run.tau, raw, &cfg.integrator, &Watch::crossing())?;
    let ev = frozen
        .x_cross()
        .ok_or_else(|| Error::NotReached(format!("frozen run from Q at tau = {} does not cross", run.tau)))?;
    let p = params.p;
    let ry1_from_energy = (p * run.h_at_q.max(0.0) / (p - 1.0)).powf((p - 1.0) / p);
    Ok(FrozenCrossing { t1: ev.t_event, ry1: ev.state.y, ry1_from_energy })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeBoundsReport {
    pub tau: f64,
    pub a: f64,
    pub epsilon: f64,
    pub t_cross: f64,
    pub ry: f64,
    pub frozen: Option<FrozenCrossing>,
    /// `tau + ln(a/|R_y|)/alpha`.
    pub star1_bound: f64,
    pub star1_slack: f64,
    pub star1_pass: bool,
    pub star2_bound: Option<f64>,
    pub star2_slack: Option<f64>,
    pub star2_pass: Option<bool>,
    /// `T1 - T`; skipped for a constant profile.
    pub tuno_slack: Option<f64>,
    pub tuno_pass: Option<bool>,
}

impl TimeBoundsReport {
    pub fn pass(&self) -> bool {
        self.star1_pass && self.star2_pass.unwrap_or(true) && self.tuno_pass.unwrap_or(true)
    }
}

const TIME_SLACK: f64 = 1e-9;

pub fn check_time_bounds(params: &ProblemParams, profile: &KProfile, run: &SegmentRun, epsilon: f64, cfg: &ShotConfig) -> Result<TimeBoundsReport> {
    let rec = run.record()?;
    let alpha = params.alpha;
    let star1_bound = rec.tau + (rec.a / rec.ry.abs()).ln() / alpha;
    let star1_slack = rec.t_cross - star1_bound;
    let constant = profile.kind() == ProfileKind::Constant;
    let frozen = if constant { None } else { Some(frozen_crossing(params, profile, run, cfg)?) };
    let star2_bound = frozen.map(|f| rec.tau + (1.0 + epsilon) / alpha * (rec.a / f.ry1.abs()).ln());
    let star2_slack = frozen.zip(star2_bound).map(|(f, b)| b - f.t1);
    let tuno_slack = frozen.map(|f| f.t1 - rec.t_cross);
    Ok(TimeBoundsReport {
        tau: rec.tau,
        a: rec.a,
        epsilon,
        t_cross: rec.t_cross,
        ry: rec.ry,
        frozen,
        star1_bound,
        star1_slack,
        star1_pass: star1_slack > -TIME_SLACK,
        star2_bound,
        star2_slack,
        star2_pass: star2_slack.map(|s| s > -TIME_SLACK),
        tuno_slack,
        tuno_pass: tuno_slack.map(|s| s > 0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub samples: usize,
    /// Smallest `|y| - a e^{-alpha(t - tau)}`.
    pub lower_slack: f64,
    /// Smallest `a e^{-alpha(t - tau)/(1 + eps)} - |y|`.
    pub upper_slack: f64,
    pub pass: bool,
}

pub fn gronwall_sandwich(params: &ProblemParams, run: &SegmentRun, epsilon: f64) -> Result<SandwichReport> {
    let (t_end, _) = run
        .crossing
        .ok_or_else(|| Error::NotReached(format!("no zero of x after the segment for d = {}", run.d)))?;
    let traj = &run.trajectory;
    let mut times: Vec<f64> = traj.samples.iter().map(|s| s.t).filter(|&t| t > run.tau && t < t_end).collect();
    let m = 400;
    times.extend((1..m).map(|i| run.tau + (t_end - run.tau) * i as f64 / m as f64));
    let (mut lower_slack, mut upper_slack) = (f64::INFINITY, f64::INFINITY);
    for &t in &times {
        let y = traj.state_at(t).expect("time lies on the trajectory").y.abs();
        let s = t - run.tau;
        lower_slack = lower_slack.min(y - run.a * (-params.alpha * s).exp());
        upper_slack = upper_slack.min(run.a * (-params.alpha * s / (1.0 + epsilon)).exp() - y);
    }
    Ok(SandwichReport {
        samples: times.len(),
        lower_slack,
        upper_slack,
        pass: lower_slack >= -TIME_SLACK && upper_slack >= -TIME_SLACK,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H0Fit {
    pub taus: Vec<f64>,
    pub energies: Vec<f64>,
    pub ry1: Vec<f64>,
    /// Slope of `ln H(Q)` against `tau`.
    pub slope: f64,
    /// Slope of `ln |R1_y|` against `tau`.
    pub ry1_slope: f64,
}

pub fn fit_h0_exponent(params: &ProblemParams, profile: &KProfile, ds: &[f64], a: f64, cfg: &ShotConfig) -> Result<H0Fit> {
    if ds.len() < 5 {
        return Err(Error::Precondition(format!("need at least 5 launches, got {}", ds.len())));
    }
    let (mut taus, mut energies, mut ry1) = (Vec::new(), Vec::new(), Vec::new());
    for &d in ds {
        let run = segment_run(params, profile, d, a, cfg)?;
        if !(run.h_at_q > 0.0) {
            return Err(Error::Precondition(format!("H(Q) = {} is not positive at tau = {}", run.h_at_q, run.tau)));
        }
        let fz = frozen_crossing(params, profile, &run, cfg)?;
        taus.push(run.tau);
        energies.push(run.h_at_q);
        ry1.push(fz.ry1.abs());
    }
    let span = taus.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - taus.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < 6.0 {
        return Err(Error::Precondition(format!("launch times span {span:.2} < 6 log-units")));
    }
    let pts: Vec<(f64, f64)> = taus.iter().zip(&energies).map(|(&t, &h)| (t, h.ln())).collect();
    let rpts: Vec<(f64, f64)> = taus.iter().zip(&ry1).map(|(&t, &r)| (t, r.ln())).collect();
    Ok(H0Fit {
        slope: fit_slope(&pts).expect("distinct launch times"),
        ry1_slope: fit_slope(&rpts).expect("distinct launch times"),
        taus,
        energies,
        ry1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierReport {
    pub tau: f64,
    pub k_under: f64,
    pub k_over: f64,
    /// Point of the stable set on the segment between the two level sets.
    pub q_hat: (f64, f64),
    /// End of the window where the bisection brackets agree.
    pub window_end: f64,
    pub samples: usize,
    /// Smallest `x - x_under` and `x_over - x`.
    pub lower_gap: f64,
    pub upper_gap: f64,
    pub first_violation: Option<f64>,
    pub decay_rate: f64,
    pub expected_rate: f64,
}

impl BarrierReport {
    pub fn ordering_holds(&self) -> bool {
        self.first_violation.is_none()
    }

    pub fn rate_within(&self, rel: f64) -> bool {
        ((self.decay_rate - self.expected_rate) / self.expected_rate).abs() <= rel
    }
}

/// Constant-`K` solution through `(x0, y0)` at `tau`, which lies on the
/// homoclinic's descending branch; returns `x(t)`.
fn homoclinic_through(params: &ProblemParams, k: f64, x0: f64, tau: f64) -> Result<impl Fn(f64) -> f64> {
    let h = Homoclinic::new(params, k, 1.0)?;
    let t_apex = h.apex_time();
    let (mut lo, mut hi) = (t_apex, t_apex + 1.0);
    while h.x(hi) > x0 {
        hi += 1.0;
    }
    if h.x(lo) < x0 * (1.0 - 1e-9) {
        return Err(Error::Precondition(format!("x = {x0} is above the apex of the level set for K = {k}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h.x(mid) >= x0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    Ok(move |t: f64| h.x(t - tau + s))
}

/// Relative agreement of the bracketing launches that bounds the checked window.
const BRACKET_AGREEMENT: f64 = 1e-6;

pub fn check_barrier_estimate(params: &ProblemParams, profile: &KProfile, k_under: f64, k_over: f64, tau: f64, cfg: &IntegratorConfig) -> Result<BarrierReport> {
    let bx = barrier_box(params, k_under, k_over)?;
    let gx = bx.g_over.0;
    let drive = Drive::Profile(profile.clone());
    let watch = Watch { x_cross: true, region_exit: true, ..Watch::default() };
    let shot = |y: f64| integrate_direct(params, &drive, PhaseState { t: tau, x: gx, y }, cfg, &watch);
    let side = |y: f64| -> Result<bool> {
        let tr = shot(y)?;
        match tr.final_event().map(|e| e.kind) {
            Some(EventKind::XCross) => Ok(true),
            Some(EventKind::RegionExit) => Ok(false),
            k => Err(Error::NotReached(format!("launch y = {y} on the segment ends with {k:?}"))),
        }
    };
    let x_under = homoclinic_through(params, k_under, gx, tau)?;
    let x_over = homoclinic_through(params, k_over, gx, tau)?;
    // lower end crosses, upper end leaves the region x' < 0; a degenerate
    // segment is the apex itself
    let (lo, hi) = if k_under < k_over {
        let (mut lo, mut hi) = (bx.g_under.1, bx.g_over.1);
        if !side(lo)? || side(hi)? {
            return Err(Error::Precondition("the segment does not separate crossing and escaping launches".into()));
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if side(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    } else {
        (bx.g_over.1, bx.g_over.1)
    };
    let a = shot(lo)?;
    let b = if lo < hi { Some(shot(hi)?) } else { None };
    let t_max = b.as_ref().map_or(a.t_end(), |b| a.t_end().min(b.t_end()));
    let mut times: Vec<f64> = a.samples.iter().map(|s| s.t).filter(|&t| t <= t_max).collect();
    let m = 2000;
    times.extend((0..=m).map(|i| tau + (t_max - tau) * i as f64 / m as f64));
    times.sort_by(f64::total_cmp);
    let mut window_end = tau;
    let (mut lower_gap, mut upper_gap) = (f64::INFINITY, f64::INFINITY);
    let mut first_violation = None;
    let mut fit = Vec::new();
    let mut checked = 0;
    for &t in &times {
        let sa = a.state_at(t).unwrap();
        let other = b.as_ref().map_or_else(|| x_over(t), |b| b.state_at(t).unwrap().x);
        if (sa.x - other).abs() > BRACKET_AGREEMENT * other.abs() {
            break;
        }
        window_end = t;
        checked += 1;
        let x = 0.5 * (sa.x + other);
        let (xl, xu) = (x_under(t), x_over(t));
        let tol = BRACKET_AGREEMENT * x.abs();
        lower_gap = lower_gap.min(x - xl);
        upper_gap = upper_gap.min(xu - x);
        if first_violation.is_none() && (x < xl - tol || x > xu + tol) {
            first_violation = Some(t);
        }
        fit.push((t, x.ln()));
    }
    let half = tau + 0.5 * (window_end - tau);
    let tail: Vec<(f64, f64)> = fit.into_iter().filter(|p| p.0 >= half).collect();
    let decay_rate = -fit_slope(&tail).ok_or_else(|| Error::NotReached("barrier window too short to fit a rate".into()))?;
    Ok(BarrierReport {
        tau,
        k_under,
        k_over,
        q_hat: (gx, 0.5 * (lo + hi)),
        window_end,
        samples: checked,
        lower_gap,
        upper_gap,
        first_violation,
        decay_rate,
        expected_rate: params.stable_decay_rate(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyIdentityReport {
    pub samples: usize,
    /// Largest relative error of `dH/dt = K'(t)|x|^q/q`.
    pub hder_error: f64,
    /// Largest relative error of the frozen-energy identity at the middle time.
    pub ripristi_error: f64,
    /// Largest `|H(state) - H(tracked)|` over the largest `|H|`.
    pub tracked_gap: f64,
}

/// Relative errors are measured against at least this fraction of the largest rate.
const RATE_FLOOR: f64 = 1e-2;
/// Consecutive steps are merged into windows at least this long.
const MIN_WINDOW: f64 = 0.05;

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

fn gauss(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * GAUSS5.iter().map(|&(x, w)| w * f(m + r * x)).sum::<f64>()
}

/// Compares the change of the energy across windows of consecutive steps with
/// the integral of its rate, for both energy-derivative identities. Errors are
/// mean-rate errors over each window relative to the local rate.
pub fn energy_identities(params: &ProblemParams, traj: &Trajectory) -> EnergyIdentityReport {
    let drive = traj.drive();
    let q = params.q;
    let tau = 0.5 * (traj.t_start() + traj.t_end());
    let k_tau = drive.k(tau).0;
    let h = |t: f64| traj.energy_at(t).unwrap();
    let state = |t: f64| traj.state_at(t).unwrap();
    let frozen_h = |t: f64| {
        let s = state(t);
        h(t) + (k_tau - drive.k(t).0) * s.x.abs().powf(q) / q
    };
    let hder_rate = |t: f64| {
        let s = state(t);
        drive.k(t).1 * s.x.abs().powf(q) / q
    };
    let rip_rate = |t: f64| {
        let s = state(t);
        let xdot = params.alpha * s.x + phi(params.y_exponent(), s.y);
        (k_tau - drive.k(t).0) * phi(q - 1.0, s.x) * xdot
    };
    // a terminal event is interpolated inside its step; keep integrator nodes only
    let interpolated_end = traj
        .final_event()
        .filter(|e| matches!(e.kind, EventKind::XCross | EventKind::RegionExit))
        .map(|e| e.t_event);
    let nodes: Vec<f64> = traj.samples.iter().map(|s| s.t).filter(|&t| Some(t) != interpolated_end).collect();
    let mut hder = Vec::with_capacity(nodes.len());
    let mut rip = Vec::with_capacity(nodes.len());
    let mut start = 0;
    let mut acc = (0.0, 0.0);
    for i in 1..nodes.len() {
        let (a, b) = (nodes[i - 1], nodes[i]);
        if b > a {
            acc.0 += gauss(hder_rate, a, b);
            acc.1 += gauss(rip_rate, a, b);
        }
        let (t0, t1) = (nodes[start], b);
        if t1 - t0 >= MIN_WINDOW || (i == nodes.len() - 1 && t1 > t0) {
            let dt = t1 - t0;
            hder.push(((h(t1) - h(t0)) / dt, acc.0 / dt));
            rip.push(((frozen_h(t1) - frozen_h(t0)) / dt, acc.1 / dt));
            start = i;
            acc = (0.0, 0.0);
        }
    }
    let rel = |v: &[(f64, f64)]| {
        let scale = v.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let floor = RATE_FLOOR * scale;
        v.iter()
            .map(|&(fd, id)| if scale == 0.0 { fd.abs() } else { (fd - id).abs() / id.abs().max(floor) })
            .fold(0.0, f64::max)
    };
    let hmax = traj.energy_trace.iter().map(|e| e.h.abs().max(e.h_tracked.abs())).fold(0.0, f64::max);
    let gap = traj.energy_trace.iter().map(|e| (e.h - e.h_tracked).abs()).fold(0.0, f64::max);
    EnergyIdentityReport {
        samples: hder.len(),
        hder_error: rel(&hder),
        ripristi_error: rel(&rip),
        tracked_gap: if hmax > 0.0 { gap / hmax } else { gap },
    }
}

/// Largest `|H|` per unit time along a constant-`K` run in plain coordinates.
pub fn energy_drift(params: &ProblemParams, k: f64, d: f64, cfg: &ShotConfig) -> Result<f64> {
    let profile = KProfile::constant(k)?;
    let launch = to_fowler(params, local_init(params, &profile, d, cfg.init_rel_tol)?)?;
    let traj = integrate_direct(params, &Drive::Profile(profile), launch, &cfg.integrator, &Watch::none())?;
    let h0 = energy(params, k, launch.x, launch.y);
    let span = traj.t_end() - traj.t_start();
    let worst = traj.samples.iter().map(|s| (energy(params, k, s.x, s.y) - h0).abs()).fold(0.0, f64::max);
    Ok(worst / span)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomoclinicResidual {
    pub d: f64,
    pub window: (f64, f64),
    pub sup_x: f64,
    pub sup_y: f64,
    pub apex_x: f64,
    pub apex_expected: f64,
}

/// Plain-coordinate shot with constant `K` against the closed-form homoclinic.
pub fn homoclinic_residual(params: &ProblemParams, k: f64, d: f64, window: (f64, f64), cfg: &ShotConfig) -> Result<HomoclinicResidual> {
    let profile = KProfile::constant(k)?;
    let launch = to_fowler(params, local_init(params, &profile, d, cfg.init_rel_tol)?)?;
    if launch.t > window.0 {
        return Err(Error::Precondition(format!("launch time {} is after the window start {}", launch.t, window.0)));
    }
    let icfg = IntegratorConfig { t_budget: window.1 - launch.t, ..cfg.integrator };
    let traj = integrate_direct(params, &Drive::Profile(profile), launch, &icfg, &Watch::none())?;
    let exact = Homoclinic::new(params, k, d)?;
    let m = 4000;
    let (mut sup_x, mut sup_y) = (0.0f64, 0.0f64);
    for i in 0..=m {
        let t = window.0 + (window.1 - window.0) * i as f64 / m as f64;
        let s = traj.state_at(t).ok_or_else(|| Error::NotReached(format!("trajectory ends before t = {t}")))?;
        let (xs, ys) = exact.state(t);
        sup_x = sup_x.max((s.x - xs).abs());
        sup_y = sup_y.max((s.y - ys).abs());
    }
    let ta = exact.apex_time();
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (ta - 1.0, ta + 1.0);
    let x_at = |t: f64| traj.state_at(t).map_or(f64::NEG_INFINITY, |s| s.x);
    for _ in 0..100 {
        let c = hi - g * (hi - lo);
        let e = lo + g * (hi - lo);
        if x_at(c) > x_at(e) {
            hi = e;
        } else {
            lo = c;
        }
    }
    Ok(HomoclinicResidual {
        d,
        window,
        sup_x,
        sup_y,
        apex_x: x_at(0.5 * (lo + hi)),
        apex_expected: gamma_apex(params, k).0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One line of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub hypotheses: Vec<String>,
    pub measured: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    pub slack: Option<f64>,
    pub status: Status,
    pub note: String,
}

impl CheckReport {
    fn new(name: &str, hypotheses: &[&str]) -> Self {
        CheckReport {
            name: name.into(),
            hypotheses: hypotheses.iter().map(|s| s.to_string()).collect(),
            measured: BTreeMap::new(),
            bounds: BTreeMap::new(),
            slack: None,
            status: Status::Skipped,
            note: String::new(),
        }
    }

    fn measure(mut self, key: &str, v: f64) -> Self {
        self.measured.insert(key.into(), v);
        self
    }

    fn bound(mut self, key: &str, v: f64) -> Self {
        self.bounds.insert(key.into(), v);
        self
    }

    fn verdict(mut self, pass: bool, slack: f64) -> Self {
        self.status = if pass { Status::Pass } else { Status::Fail };
        self.slack = Some(slack);
        self
    }

    fn skipped(mut self, note: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.note = note.into();
        self
    }

    fn failed(mut self, err: &Error) -> Self {
        self.status = Status::Fail;
        self.note = err.to_string();
        self
    }
}

/// Settings of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteOptions {
    pub epsilon: f64,
    /// Launch times `tau` of the segment checks.
    pub tau_range: (f64, f64),
    pub launches: usize,
    /// Initial values of the energy-identity shots.
    pub d_range: (f64, f64),
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { epsilon: 0.5, tau_range: (-16.0, -8.0), launches: 5, d_range: (1e-1, 1e2), seed: 1 }
    }
}

const HDER_TOL: f64 = 1e-5;

/// Runs every diagnostic on one profile.
pub fn run_suite(params: &ProblemParams, profile: &KProfile, cfg: &ShotConfig, opts: &SuiteOptions) -> Vec<CheckReport> {
    use rand::{Rng, SeedableRng};
    let mut out = Vec::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let constant = profile.kind() == ProfileKind::Constant;

    // energy identities along random shots
    let mut rep = CheckReport::new("energy_identity", &["dH/dt = K'(t)|x|^q/q along solutions"]).bound("relative_error", HDER_TOL);
    // the derivative form and its integral form share the bound
    let mut worst = (0.0f64, 0.0f64);
    let mut err = None;
    for _ in 0..3 {
        let d = (rng.gen_range(opts.d_range.0.ln()..opts.d_range.1.ln())).exp();
        match shooting::trajectory(params, profile, d, cfg, &Watch::crossing()) {
            Ok(tr) => {
                let r = energy_identities(params, &tr);
                worst = (worst.0.max(r.hder_error).max(r.tracked_gap), worst.1.max(r.ripristi_error));
            }
            Err(e) => err = Some(e),
        }
    }
    rep = match err {
        Some(e) => rep.failed(&e),
        None => rep
            .measure("hder_error", worst.0)
            .measure("ripristi_error", worst.1)
            .verdict(worst.0 <= HDER_TOL && worst.1 <= HDER_TOL, HDER_TOL - worst.0.max(worst.1)),
    };
    out.push(rep);

    // homoclinic residual and drift with K = K(-inf)
    let rep = CheckReport::new("homoclinic_residual", &["K constant"]).bound("sup_error", 1e-6);
    let hcfg = ShotConfig { init_rel_tol: cfg.init_rel_tol.min(1e-10), ..*cfg };
    // the series launch moves later as p leaves 2; start the window after it
    let start = KProfile::constant(profile.a())
        .and_then(|k| local_init(params, &k, 1.0, hcfg.init_rel_tol))
        .and_then(|r| to_fowler(params, r))
        .map_or(-8.0, |s| s.t.ceil().max(-8.0));
    out.push(match homoclinic_residual(params, profile.a(), 1.0, (start, 4.0), &hcfg) {
        Ok(h) => {
            let e = h.sup_x.max(h.sup_y).max((h.apex_x - h.apex_expected).abs());
            rep.measure("sup_x", h.sup_x).measure("sup_y", h.sup_y).measure("apex_x", h.apex_x).verdict(e <= 1e-6, 1e-6 - e)
        }
        Err(e) => rep.failed(&e),
    });
    let rep = CheckReport::new("energy_drift", &["K constant"]).bound("drift_per_unit_time", 1e-9);
    out.push(match energy_drift(params, profile.a(), 1.0, cfg) {
        Ok(v) => rep.measure("drift_per_unit_time", v).verdict(v <= 1e-9, 1e-9 - v),
        Err(e) => rep.failed(&e),
    });

    // segment checks on the truncated profile
    let truncated = profile.check_tzero_window().and_then(|t0| profile.truncate(t0).map(|p| (t0, p)));
    let (t0, trunc) = match truncated {
        Ok(v) => v,
        Err(e) => {
            let why = if constant { "K constant: K' > 0 fails".to_string() } else { e.to_string() };
            for name in ["time_bounds", "tuno", "gronwall_sandwich", "h0_scaling", "barrier_estimate"] {
                out.push(CheckReport::new(name, &["K increasing and bounded"]).skipped(why.clone()));
            }
            return out;
        }
    };
    let k_bar = trunc.limit_plus_inf().expect("truncated profiles have a limit");
    let a = match a_of_eps(params, opts.epsilon, k_bar) {
        Ok(a) => a,
        Err(e) => {
            out.push(CheckReport::new("time_bounds", &[]).failed(&e));
            return out;
        }
    };
    let taus: Vec<f64> = (0..opts.launches)
        .map(|i| opts.tau_range.0 + (opts.tau_range.1 - opts.tau_range.0) * i as f64 / (opts.launches.max(2) - 1) as f64)
        .collect();
    let hyp = ["K increasing and bounded (truncated)", "a = a(eps)"];
    let mut tb = CheckReport::new("time_bounds", &hyp).measure("T0", t0).measure("a", a);
    let mut tuno = CheckReport::new("tuno", &hyp);
    let mut sand = CheckReport::new("gronwall_sandwich", &hyp).bound("slack", -TIME_SLACK);
    let mut worst_tb = f64::INFINITY;
    let mut worst_tuno = f64::INFINITY;
    let mut worst_sand = f64::INFINITY;
    let mut failure = None;
    for &tau in &taus {
        let res = d_for_tau(params, &trunc, a, tau)
            .and_then(|d| segment_run(params, &trunc, d, a, cfg))
            .and_then(|run| Ok((check_time_bounds(params, &trunc, &run, opts.epsilon, cfg)?, gronwall_sandwich(params, &run, opts.epsilon)?)));
        match res {
            Ok((t, s)) => {
                worst_tb = worst_tb.min(t.star1_slack).min(t.star2_slack.unwrap_or(f64::INFINITY));
                worst_tuno = worst_tuno.min(t.tuno_slack.unwrap_or(f64::INFINITY));
                worst_sand = worst_sand.min(s.lower_slack).min(s.upper_slack);
            }
            Err(e) => failure = Some(e),
        }
    }
    match failure {
        Some(e) => {
            tb = tb.failed(&e);
            tuno = tuno.failed(&e);
            sand = sand.failed(&e);
        }
        None => {
            tb = tb.measure("min_slack", worst_tb).verdict(worst_tb > -TIME_SLACK, worst_tb);
            tuno = tuno.measure("min_T1_minus_T", worst_tuno).verdict(worst_tuno > 0.0, worst_tuno);
            sand = sand.measure("min_slack", worst_sand).verdict(worst_sand >= -TIME_SLACK, worst_sand);
        }
    }
    out.extend([tb, tuno, sand]);

    let ell = profile.ell().unwrap_or(f64::NAN);
    let rep = CheckReport::new("h0_scaling", &["K = A + B r^ell + h"]).bound("ell", ell).bound("rel_tol", 0.05);
    let ds: Result<Vec<f64>> = taus.iter().map(|&t| d_for_tau(params, profile, a, t)).collect();
    out.push(match ds.and_then(|ds| fit_h0_exponent(params, profile, &ds, a, cfg)) {
        Ok(f) => {
            let e1 = (f.slope / ell - 1.0).abs();
            let ry = (params.p - 1.0) * ell / params.p;
            let e2 = (f.ry1_slope / ry - 1.0).abs();
            rep.measure("slope", f.slope).measure("ry1_slope", f.ry1_slope).verdict(e1.max(e2) <= 0.05, 0.05 - e1.max(e2))
        }
        Err(e) => rep.failed(&e),
    });

    let rep = CheckReport::new("barrier_estimate", &["K between K_under and K_over"]).bound("rate_rel_tol", 0.1);
    let (ku, ko) = (trunc.a(), k_bar);
    out.push(match check_barrier_estimate(params, &trunc, ku, ko, 0.0, &cfg.integrator) {
        Ok(b) => {
            let e = (b.decay_rate / b.expected_rate - 1.0).abs();
            rep.measure("decay_rate", b.decay_rate)
                .measure("expected_rate", b.expected_rate)
                .measure("window_end", b.window_end)
                .measure("lower_gap", b.lower_gap)
                .measure("upper_gap", b.upper_gap)
                .verdict(b.ordering_holds() && e <= 0.1, 0.1 - e)
        }
        Err(e) => rep.failed(&e),
    });
    out
}
