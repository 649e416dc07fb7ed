//! Regular solutions `u(r; d)` and the first-zero map `R(d)`.

use serde::{Deserialize, Serialize};

use crate::dynsys::{Drive, Homoclinic};
use crate::error::{Error, Result};
use crate::fowler::{local_init, to_fowler, RadialState};
use crate::integrate::dopri::State;
use crate::integrate::{integrate, EventKind, Frame, IntegratorConfig, Trajectory, Watch};
use crate::kprofile::KProfile;
use crate::params::ProblemParams;

/// Coordinates used for shots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Deviation from the homoclinic of the frozen system at `K(-inf)`.
    Deviation,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShotConfig {
    pub integrator: IntegratorConfig,
    /// Relative size of the second expansion term at the launch radius.
    pub init_rel_tol: f64,
    pub method: Method,
    pub keep_trajectory: bool,
}

impl Default for ShotConfig {
    fn default() -> Self {
        ShotConfig {
            integrator: IntegratorConfig::default(),
            init_rel_tol: 1e-8,
            method: Method::Deviation,
            keep_trajectory: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Decaying,
    NearHomoclinic,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum Outcome {
    Crossing { t: f64, r: f64, y_at_zero: f64 },
    PositiveUpToBudget { t_end: f64, x_end: f64, trend: Trend },
    Diverged { t: f64 },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Crossing { .. } => "crossing",
            Outcome::PositiveUpToBudget { .. } => "positive_up_to_budget",
            Outcome::Diverged { .. } => "diverged",
        }
    }

    /// First zero `R(d)` when the shot crosses.
    pub fn radius(&self) -> Option<f64> {
        match self {
            Outcome::Crossing { r, .. } => Some(*r),
            _ => None,
        }
    }

    pub fn log_radius(&self) -> Option<f64> {
        match self {
            Outcome::Crossing { t, .. } => Some(*t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShotResult {
    pub d: f64,
    pub outcome: Outcome,
    /// `u' < 0` at every sample before the first zero.
    pub decreasing: bool,
    pub trajectory: Option<Trajectory>,
}

/// Initial data of a shot in the chosen frame.
#[derive(Debug, Clone, Copy)]
pub struct Launch {
    pub radial: RadialState,
    pub t0: f64,
    pub frame: Frame,
    pub raw0: State,
}

/// Leading-order effect of `K - A = sum c r^m` on the regular solution at
/// radius `r`: `(dx, dy, H)` relative to the homoclinic with the same `d`.
fn excess_correction(params: &ProblemParams, a: f64, d: f64, r: f64, terms: &[crate::kprofile::PowerTerm]) -> State {
    let (n, p, q) = (params.n as f64, params.p, params.q);
    let pc = params.p_conj();
    let dq1 = d.powf(q - 1.0);
    let lead = (dq1 * a / n).powf((2.0 - p) / (p - 1.0)) * dq1 / (p - 1.0);
    let mut out = [0.0; 3];
    for term in terms {
        let (c, m) = (term.coeff, term.exponent);
        out[0] -= lead * c * r.powf(pc + m + params.alpha) / ((n + m) * (pc + m));
        out[1] -= dq1 * c * r.powf(1.0 + m + params.beta) / (n + m);
        out[2] += d.powf(q) * c * m * r.powf(n + m) / (q * (n + m));
    }
    out
}

pub fn launch(params: &ProblemParams, profile: &KProfile, d: f64, cfg: &ShotConfig) -> Result<Launch> {
    let radial = local_init(params, profile, d, cfg.init_rel_tol)?;
    let start = to_fowler(params, radial)?;
    let t0 = start.t;
    let series = match profile.power_terms() {
        Some((terms, t_max)) if t0 <= t_max => Some(excess_correction(params, profile.a(), d, radial.r, &terms)),
        _ if profile.excess_t(t0) == 0.0 => Some([0.0; 3]),
        _ => None,
    };
    match cfg.method {
        Method::Direct => {
            let h0 = series.map(|s| s[2]).unwrap_or_else(|| {
                crate::dynsys::energy(params, profile.eval_t(t0).0, start.x, start.y)
            });
            Ok(Launch { radial, t0, frame: Frame::Direct, raw0: [start.x, start.y, h0] })
        }
        Method::Deviation => {
            let reference = Homoclinic::new(params, profile.a(), d)?;
            let frame = Frame::Deviation(reference);
            let raw0 = match series {
                Some(s) => s,
                None => {
                    let (xs, ys) = reference.state(t0);
                    let mut raw = [start.x - xs, start.y - ys, 0.0];
                    raw[2] = frame.energy(params, &Drive::Profile(profile.clone()), t0, &raw);
                    raw
                }
            };
            Ok(Launch { radial, t0, frame, raw0 })
        }
    }
}

/// Integrates the regular solution `u(r; d)` with the given watch set.
pub fn trajectory(params: &ProblemParams, profile: &KProfile, d: f64, cfg: &ShotConfig, watch: &Watch) -> Result<Trajectory> {
    let l = launch(params, profile, d, cfg)?;
    integrate(params, &Drive::Profile(profile.clone()), &l.frame, l.t0, l.raw0, &cfg.integrator, watch)
}

pub fn shoot(params: &ProblemParams, profile: &KProfile, d: f64, cfg: &ShotConfig) -> Result<ShotResult> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Argument(format!("initial value d = {d} must be positive")));
    }
    let traj = trajectory(params, profile, d, cfg, &Watch::crossing())?;
    Ok(classify(params, d, traj, cfg.keep_trajectory))
}

/// Reads the outcome off an integrated regular solution.
pub fn classify(params: &ProblemParams, d: f64, traj: Trajectory, keep: bool) -> ShotResult {
    let last = *traj.final_event().expect("integration always ends with an event");
    let outcome = match last.kind {
        EventKind::XCross => Outcome::Crossing { t: last.t_event, r: last.t_event.exp(), y_at_zero: last.state.y },
        EventKind::Divergence => Outcome::Diverged { t: last.t_event },
        _ => {
            let t_end = last.t_event;
            let x_end = last.state.x;
            Outcome::PositiveUpToBudget { t_end, x_end, trend: trend(params, &traj) }
        }
    };
    let t_stop = last.t_event;
    let decreasing = traj.samples.iter().filter(|s| s.t < t_stop).all(|s| s.y < 0.0);
    ShotResult { d, outcome, decreasing, trajectory: keep.then_some(traj) }
}

fn trend(params: &ProblemParams, traj: &Trajectory) -> Trend {
    let max_h = traj.energy_trace.iter().map(|e| e.h.abs()).fold(0.0, f64::max);
    if max_h < 1e-4 {
        return Trend::NearHomoclinic;
    }
    let end = traj.t_end();
    let (Some(a), Some(b)) = (traj.state_at(end - 1.0), traj.state_at(end)) else {
        return Trend::Undetermined;
    };
    if a.x > 0.0 && b.x > 0.0 && b.x < 1e-6 && (b.x.ln() - a.x.ln()) < -params.alpha / 2.0 {
        Trend::Decaying
    } else {
        Trend::Undetermined
    }
}

/// `R(d)` if `u(r; d)` has a zero within the budget.
pub fn first_zero(params: &ProblemParams, profile: &KProfile, d: f64, cfg: &ShotConfig) -> Result<Option<f64>> {
    Ok(shoot(params, profile, d, cfg)?.outcome.radius())
}

/// Budget-bounded surrogate for membership in the set of crossing data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    InJ,
    NotInJWithinBudget,
    Unknown,
}

pub fn membership_j(params: &ProblemParams, profile: &KProfile, d: f64, cfg: &ShotConfig) -> Membership {
    match shoot(params, profile, d, cfg).map(|s| s.outcome) {
        Ok(Outcome::Crossing { .. }) => Membership::InJ,
        Ok(Outcome::PositiveUpToBudget { trend: Trend::Decaying | Trend::NearHomoclinic, .. }) => {
            Membership::NotInJWithinBudget
        }
        _ => Membership::Unknown,
    }
}

/// `u(r; d)` at a fixed radius, continuing past a zero if there is one.
pub fn value_at_radius(params: &ProblemParams, profile: &KProfile, d: f64, r: f64, cfg: &ShotConfig) -> Result<f64> {
    let l = launch(params, profile, d, cfg)?;
    let t1 = r.ln();
    if !(t1 > l.t0) {
        return Err(Error::Argument(format!("radius {r} lies inside the launch radius {}", l.radial.r)));
    }
    let icfg = IntegratorConfig { t_budget: t1 - l.t0, ..cfg.integrator };
    let traj = integrate(params, &Drive::Profile(profile.clone()), &l.frame, l.t0, l.raw0, &icfg, &Watch::none())?;
    let end = traj.final_event().unwrap();
    if !matches!(end.kind, EventKind::BudgetExceeded) {
        return Err(Error::NotReached(format!("integration stopped at t = {} before r = {r}", end.t_event)));
    }
    Ok(end.state.x * (-params.alpha * t1).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn n4p2() -> ProblemParams {
        make_params(4, 2.0).unwrap()
    }

    #[test]
    fn constant_k_stays_on_the_bubble() {
        let pr = n4p2();
        let k = KProfile::constant(1.0).unwrap();
        let cfg = ShotConfig { keep_trajectory: true, ..Default::default() };
        let shot = shoot(&pr, &k, 1.0, &cfg).unwrap();
        match shot.outcome {
            Outcome::PositiveUpToBudget { trend, .. } => assert_eq!(trend, Trend::NearHomoclinic),
            o => panic!("unexpected {o:?}"),
        }
        let tr = shot.trajectory.unwrap();
        let mut sup: f64 = 0.0;
        for i in 0..=2000 {
            let r = 0.01 * i as f64;
            let t = r.max(tr.samples[0].t.exp()).ln();
            let s = tr.state_at(t).unwrap();
            let u = s.x * (-pr.alpha * t).exp();
            sup = sup.max((u - 1.0 / (1.0 + r * r / 8.0)).abs());
        }
        assert!(sup <= 1e-6, "sup {sup}");
        assert_eq!(first_zero(&pr, &k, 1.0, &cfg).unwrap(), None);
        assert_eq!(membership_j(&pr, &k, 1.0, &cfg), Membership::NotInJWithinBudget);
    }

    #[test]
    fn increasing_k_crosses() {
        let pr = n4p2();
        let k = KProfile::power(1.0, 1.0, 2.0, vec![]).unwrap();
        let cfg = ShotConfig::default();
        let shot = shoot(&pr, &k, 1.0, &cfg).unwrap();
        let Outcome::Crossing { t, r, y_at_zero } = shot.outcome else { panic!("{:?}", shot.outcome) };
        assert!(r > 0.0 && r == t.exp() && y_at_zero < 0.0);
        assert!(shot.decreasing);
        assert_eq!(membership_j(&pr, &k, 1.0, &cfg), Membership::InJ);
        assert!(shoot(&pr, &k, -1.0, &cfg).is_err());
    }

    #[test]
    fn deviation_and_direct_methods_agree() {
        for &p in &[2.0, 1.5] {
            let pr = make_params(4, p).unwrap();
            for prof in ["1+r^2", "1+r", "1+r^3-0.2*r^4+r^5"] {
                let k = crate::kprofile::parse_profile(prof).unwrap();
                for &d in &[0.3, 1.0, 5.0] {
                    let dev = ShotConfig { integrator: IntegratorConfig { rel_tol: 1e-12, ..Default::default() }, ..Default::default() };
                    let dir = ShotConfig { method: Method::Direct, ..dev };
                    let a = first_zero(&pr, &k, d, &dev).unwrap().unwrap();
                    let b = first_zero(&pr, &k, d, &dir).unwrap().unwrap();
                    assert!((a - b).abs() <= 1e-7 * a, "p={p} K={prof} d={d}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn tolerance_robustness() {
        let pr = n4p2();
        let k = KProfile::power(1.0, 1.0, 2.0, vec![]).unwrap();
        let loose = ShotConfig { integrator: IntegratorConfig { rel_tol: 1e-8, ..Default::default() }, ..Default::default() };
        let tight = ShotConfig { integrator: IntegratorConfig { rel_tol: 1e-12, ..Default::default() }, ..Default::default() };
        let a = first_zero(&pr, &k, 1.0, &loose).unwrap().unwrap();
        let b = first_zero(&pr, &k, 1.0, &tight).unwrap().unwrap();
        assert!((a - b).abs() <= 1e-6 * b);
        let init = ShotConfig { init_rel_tol: 1e-10, ..tight };
        let c = first_zero(&pr, &k, 1.0, &init).unwrap().unwrap();
        assert!((c - b).abs() <= 1e-6 * b);
    }

    #[test]
    fn launch_series_matches_energy_of_state() {
        let pr = n4p2();
        let k = KProfile::power(1.0, 1.0, 2.0, vec![]).unwrap();
        let cfg = ShotConfig::default();
        let l = launch(&pr, &k, 2.0, &cfg).unwrap();
        let h_state = l.frame.energy(&pr, &Drive::Profile(k.clone()), l.t0, &l.raw0);
        assert!(l.raw0[2] > 0.0);
        assert!((h_state - l.raw0[2]).abs() <= 1e-3 * l.raw0[2], "{h_state} vs {}", l.raw0[2]);
    }

    #[test]
    fn value_at_radius_matches_bubble() {
        let pr = n4p2();
        let k = KProfile::constant(1.0).unwrap();
        let u = value_at_radius(&pr, &k, 2.0, 3.0, &ShotConfig::default()).unwrap();
        assert!((u - 2.0 / (1.0 + 4.0 * 9.0 / 8.0)).abs() < 1e-12);
    }
}
