//! Fowler change of variables and the launch of regular solutions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kprofile::KProfile;
use crate::params::ProblemParams;

/// `Phi_m(s) = s|s|^{m-1}`, with `Phi_m(0) = 0`.
#[inline]
pub fn phi(m: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.signum() * s.abs().powf(m)
    }
}

/// `Phi_m(a + delta) - Phi_m(a)` without cancellation when `delta` is small.
#[inline]
pub fn powdiff(m: f64, a: f64, delta: f64) -> f64 {
    if m == 1.0 {
        delta
    } else if a == 0.0 {
        phi(m, delta)
    } else if delta.abs() <= 0.5 * a.abs() {
        phi(m, a) * (m * (delta / a).ln_1p()).exp_m1()
    } else {
        phi(m, a + delta) - phi(m, a)
    }
}

/// `|a + delta|^m - |a|^m` without cancellation when `delta` is small.
#[inline]
pub fn absdiff(m: f64, a: f64, delta: f64) -> f64 {
    if a == 0.0 {
        delta.abs().powf(m)
    } else if delta.abs() <= 0.5 * a.abs() {
        a.abs().powf(m) * (m * (delta / a).ln_1p()).exp_m1()
    } else {
        (a + delta).abs().powf(m) - a.abs().powf(m)
    }
}

/// A point `(t, x, y)` in Fowler coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// A point `(r, u, u')` of a radial solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialState {
    pub r: f64,
    pub u: f64,
    pub du: f64,
}

pub fn to_fowler(params: &ProblemParams, s: RadialState) -> Result<PhaseState> {
    if !(s.r > 0.0) || !s.r.is_finite() {
        return Err(Error::Argument(format!("radius r = {} must be positive", s.r)));
    }
    Ok(PhaseState {
        t: s.r.ln(),
        x: s.u * s.r.powf(params.alpha),
        y: phi(params.p - 1.0, s.du) * s.r.powf(params.beta),
    })
}

pub fn from_fowler(params: &ProblemParams, s: PhaseState) -> RadialState {
    RadialState {
        r: s.t.exp(),
        u: s.x * (-params.alpha * s.t).exp(),
        du: phi(params.y_exponent(), s.y) * (-params.beta * s.t / (params.p - 1.0)).exp(),
    }
}

/// Coefficient `c1` of the expansion `u(r) = d - c1 r^{p/(p-1)} + ...`.
fn expansion_coeff(params: &ProblemParams, k0: f64, d: f64) -> f64 {
    let p = params.p;
    (p - 1.0) / p * (k0 * d.powf(params.q - 1.0) / params.n as f64).powf(1.0 / (p - 1.0))
}

/// Starting radius at which the second expansion term equals `rel_tol * d`.
pub fn launch_radius(params: &ProblemParams, k0: f64, d: f64, rel_tol: f64) -> f64 {
    (rel_tol * d / expansion_coeff(params, k0, d)).powf(1.0 / params.p_conj())
}

/// Two-term expansion of the regular solution `u(r; d)` at the radius where
/// the correction is `rel_tol * d`.
pub fn local_init(params: &ProblemParams, profile: &KProfile, d: f64, rel_tol: f64) -> Result<RadialState> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Argument(format!("initial value d = {d} must be positive")));
    }
    if !(rel_tol > 0.0 && rel_tol <= 1e-6) {
        return Err(Error::Argument(format!("launch tolerance {rel_tol} must lie in (0, 1e-6]")));
    }
    let k0 = profile.a();
    let r0 = launch_radius(params, k0, d, rel_tol);
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(Error::Argument(format!("no finite launch radius for d = {d}")));
    }
    Ok(expansion_at(params, k0, d, r0))
}

/// The expansion evaluated at a given radius.
pub fn expansion_at(params: &ProblemParams, k0: f64, d: f64, r: f64) -> RadialState {
    let p = params.p;
    let c1 = expansion_coeff(params, k0, d);
    RadialState {
        r,
        u: d - c1 * r.powf(params.p_conj()),
        du: -(k0 * d.powf(params.q - 1.0) * r / params.n as f64).powf(1.0 / (p - 1.0)),
    }
}
