//! Right-hand sides of the Fowler systems, the Pohozaev-type energy, the
//! equilibrium and homoclinic of the frozen systems, and barrier level sets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fowler::{absdiff, phi, PhaseState};
use crate::kprofile::KProfile;
use crate::params::ProblemParams;

pub const OVERFLOW_GUARD: f64 = 1e12;

/// Constant curvature of a frozen system.
///
/// The value is stored as `base + excess` so that the small difference from
/// `K(-inf)` survives when the frozen value is taken deep in the flat region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrozenSpec {
    pub k_value: f64,
    base: f64,
    excess: f64,
}

impl FrozenSpec {
    pub fn new(k_value: f64) -> Result<Self> {
        if !(k_value > 0.0) || !k_value.is_finite() {
            return Err(Error::Argument(format!("frozen K = {k_value} must be positive")));
        }
        Ok(FrozenSpec { k_value, base: k_value, excess: 0.0 })
    }

    /// The frozen system at time `tau` of `profile`.
    pub fn at(profile: &KProfile, tau: f64) -> Self {
        let base = profile.a();
        let excess = profile.excess_t(tau);
        FrozenSpec { k_value: base + excess, base, excess }
    }
}

/// Source of `K(t)` for an integration: a profile or a frozen constant.
#[derive(Debug, Clone, PartialEq)]
pub enum Drive {
    Profile(KProfile),
    Frozen(FrozenSpec),
}

impl Drive {
    /// `(K(t), dK/dt)`.
    pub fn k(&self, t: f64) -> (f64, f64) {
        match self {
            Drive::Profile(p) => p.eval_t(t),
            Drive::Frozen(f) => (f.k_value, 0.0),
        }
    }

    /// `K(t) - k_ref`, accurate when `k_ref` is the natural base value.
    pub fn excess_over(&self, t: f64, k_ref: f64) -> f64 {
        match self {
            Drive::Profile(p) if p.a() == k_ref => p.excess_t(t),
            Drive::Frozen(f) if f.base == k_ref => f.excess,
            _ => self.k(t).0 - k_ref,
        }
    }

    /// `K(-inf)` of a profile, or the frozen value.
    pub fn base(&self) -> f64 {
        match self {
            Drive::Profile(p) => p.a(),
            Drive::Frozen(f) => f.base,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Drive::Profile(p) => p.kind() == crate::kprofile::ProfileKind::Constant,
            Drive::Frozen(_) => true,
        }
    }
}

#[inline]
fn field(params: &ProblemParams, k: f64, x: f64, y: f64) -> (f64, f64) {
    (
        params.alpha * x + phi(params.y_exponent(), y),
        -params.alpha * y - k * phi(params.q - 1.0, x),
    )
}

fn guard(s: &PhaseState) -> Result<()> {
    if !(s.x.abs() <= OVERFLOW_GUARD && s.y.abs() <= OVERFLOW_GUARD) {
        return Err(Error::Divergence(format!("state ({}, {}) at t = {} exceeds the overflow guard", s.x, s.y, s.t)));
    }
    Ok(())
}

/// Vector field of the non-autonomous system.
pub fn rhs(params: &ProblemParams, profile: &KProfile, s: PhaseState) -> Result<(f64, f64)> {
    guard(&s)?;
    Ok(field(params, profile.eval_t(s.t).0, s.x, s.y))
}

/// Vector field of the frozen autonomous system.
pub fn rhs_frozen(params: &ProblemParams, frozen: &FrozenSpec, s: PhaseState) -> Result<(f64, f64)> {
    guard(&s)?;
    Ok(field(params, frozen.k_value, s.x, s.y))
}

pub fn rhs_drive(params: &ProblemParams, drive: &Drive, t: f64, x: f64, y: f64) -> (f64, f64) {
    field(params, drive.k(t).0, x, y)
}

/// `alpha x y + (p-1)/p |y|^{p/(p-1)} + K |x|^q / q`.
pub fn energy(params: &ProblemParams, k: f64, x: f64, y: f64) -> f64 {
    params.alpha * x * y
        + (params.p - 1.0) / params.p * y.abs().powf(params.p_conj())
        + k * x.abs().powf(params.q) / params.q
}

/// Energy of `(x* + dx, y* + dy)` for `K = k_ref + excess`, given that
/// `(x*, y*)` lies on the zero level set for `k_ref`.
pub fn energy_near_level(
    params: &ProblemParams,
    k_ref: f64,
    excess: f64,
    (xs, ys): (f64, f64),
    (dx, dy): (f64, f64),
) -> f64 {
    params.alpha * (xs * dy + ys * dx + dx * dy)
        + (params.p - 1.0) / params.p * absdiff(params.p_conj(), ys, dy)
        + k_ref / params.q * absdiff(params.q, xs, dx)
        + excess * (xs + dx).abs().powf(params.q) / params.q
}

/// `dH/dt = K'(t) |x|^q / q` along solutions of the full system.
pub fn energy_rate(params: &ProblemParams, kdot: f64, x: f64) -> f64 {
    kdot * x.abs().powf(params.q) / params.q
}

/// `d/dt H(x(t), y(t); tau) = (K(tau) - K(t)) Phi_{q-1}(x) x'`.
pub fn frozen_energy_rate(params: &ProblemParams, k_tau: f64, k_t: f64, x: f64, xdot: f64) -> f64 {
    (k_tau - k_t) * phi(params.q - 1.0, x) * xdot
}

/// Equilibrium in `{x > 0, y < 0}` of the frozen system.
pub fn equilibrium(params: &ProblemParams, frozen: &FrozenSpec) -> (f64, f64) {
    let (p, q, a) = (params.p, params.q, params.alpha);
    (
        (a.powf(p) / frozen.k_value).powf(1.0 / (q - p)),
        -(a.powf(q) / frozen.k_value).powf((p - 1.0) / (q - p)),
    )
}

/// Point of the zero level set with `x' = 0` and `x > 0`.
pub fn gamma_apex(params: &ProblemParams, k: f64) -> (f64, f64) {
    let (p, q, a) = (params.p, params.q, params.alpha);
    let x = (q * a.powf(p) / (p * k)).powf(1.0 / (q - p));
    (x, -(a * x).powf(p - 1.0))
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Ground-state homoclinic of the frozen system with `x e^{-alpha t} -> d`,
///
/// ```text
/// x*(t) = d [e^{-t} + C e^{t/(p-1)}]^{-(n-p)/p}
/// ```
///
/// with `y*` obtained by differentiating the corresponding radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Homoclinic {
    pub k: f64,
    pub d: f64,
    pub c: f64,
    #[serde(skip)]
    alpha: f64,
    #[serde(skip)]
    p_conj: f64,
    #[serde(skip)]
    ln_c: f64,
    #[serde(skip)]
    ln_d: f64,
    #[serde(skip)]
    ln_ycoef: f64,
    #[serde(skip)]
    y_rate: f64,
    #[serde(skip)]
    y_power: f64,
}

impl Homoclinic {
    pub fn new(params: &ProblemParams, k: f64, d: f64) -> Result<Self> {
        let c = calibrate_c(params, &FrozenSpec::new(k)?, d)?;
        Ok(Self::with_c(params, k, d, c))
    }

    fn with_c(params: &ProblemParams, k: f64, d: f64, c: f64) -> Self {
        let (n, p) = (params.n as f64, params.p);
        Homoclinic {
            k,
            d,
            c,
            alpha: params.alpha,
            p_conj: params.p_conj(),
            ln_c: c.ln(),
            ln_d: d.ln(),
            ln_ycoef: (p - 1.0) * (d.ln() + c.ln() + ((n - p) / (p - 1.0)).ln()),
            y_rate: 1.0 + params.beta,
            y_power: n * (p - 1.0) / p,
        }
    }

    pub fn x(&self, t: f64) -> f64 {
        (self.ln_d + self.alpha * t - self.alpha * softplus(self.ln_c + self.p_conj * t)).exp()
    }

    pub fn y(&self, t: f64) -> f64 {
        -(self.ln_ycoef + self.y_rate * t - self.y_power * softplus(self.ln_c + self.p_conj * t)).exp()
    }

    pub fn state(&self, t: f64) -> (f64, f64) {
        let sp = softplus(self.ln_c + self.p_conj * t);
        (
            (self.ln_d + self.alpha * t - self.alpha * sp).exp(),
            -(self.ln_ycoef + self.y_rate * t - self.y_power * sp).exp(),
        )
    }

    /// Time of the maximum of `x*`.
    pub fn apex_time(&self) -> f64 {
        let pm1 = self.p_conj / (self.p_conj - 1.0) - 1.0;
        (pm1.ln() - self.ln_c) / self.p_conj
    }

    /// Time at which `y* = -a` on the branch after the apex, if any.
    pub fn y_level_time(&self, a: f64) -> Option<f64> {
        let t_apex = self.apex_time();
        // y* is unimodal with its minimum after the apex; bracket on the descent to 0
        let mut lo = t_apex;
        let ymin_t = golden_min(|t| self.y(t), t_apex - 10.0, t_apex + 10.0);
        if self.y(ymin_t) > -a {
            return None;
        }
        lo = lo.max(ymin_t);
        let mut hi = lo + 1.0;
        while self.y(hi) <= -a {
            hi += 1.0;
            if hi > lo + 1e4 {
                return None;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.y(mid) <= -a {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}

/// `x*(t)` of the homoclinic with `x e^{-alpha t} -> d`.
pub fn homoclinic_x(params: &ProblemParams, frozen: &FrozenSpec, d: f64, t: f64) -> Result<f64> {
    Ok(Homoclinic::new(params, frozen.k_value, d)?.x(t))
}

/// The constant `C(d)` of the homoclinic: the apex of the candidate curve
/// must carry zero energy. The apex value of the closed form fixes `ln C`
/// linearly; Newton steps on the apex energy then polish it.
pub fn calibrate_c(params: &ProblemParams, frozen: &FrozenSpec, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Argument(format!("d = {d} must be positive")));
    }
    let p = params.p;
    let k = frozen.k_value;
    let (x_apex, _) = gamma_apex(params, k);
    let mut ln_c = (p - 1.0).ln() + params.p_conj() * ((d.ln() - x_apex.ln()) / params.alpha - p.ln());
    let scale = params.alpha.powf(p) * x_apex.powf(p);
    let apex_energy = |ln_c: f64| {
        let h = Homoclinic::with_c(params, k, d, ln_c.exp());
        let t = h.apex_time();
        let (x, y) = h.state(t);
        energy(params, k, x, y) / scale
    };
    for _ in 0..20 {
        let g = apex_energy(ln_c);
        if !g.is_finite() {
            return Err(Error::RootFind(format!("apex energy not finite for d = {d}")));
        }
        if g.abs() < 1e-14 {
            return Ok(ln_c.exp());
        }
        let step = 1e-6;
        let dg = (apex_energy(ln_c + step) - apex_energy(ln_c - step)) / (2.0 * step);
        if dg == 0.0 || !dg.is_finite() {
            return Err(Error::RootFind(format!("flat apex energy while calibrating C({d})")));
        }
        ln_c -= g / dg;
    }
    if apex_energy(ln_c).abs() < 1e-12 {
        Ok(ln_c.exp())
    } else {
        Err(Error::RootFind(format!("C({d}) calibration did not converge")))
    }
}

/// True iff `x > 0` and `|H(x, y)| <= tol` for the frozen `K`.
pub fn gamma_membership(params: &ProblemParams, frozen: &FrozenSpec, x: f64, y: f64, tol: f64) -> bool {
    x > 0.0 && energy(params, frozen.k_value, x, y).abs() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierRegion {
    InsideB,
    OnBoundary,
    Outside,
}

/// Corner points of the box `B` built from the level sets for `K_over`
/// (inner curve) and `K_under` (outer curve).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierBox {
    pub k_under: f64,
    pub k_over: f64,
    /// Apex of the inner curve.
    pub g_over: (f64, f64),
    /// Point of the outer curve below `g_over`, in `x' < 0`.
    pub g_under: (f64, f64),
}

pub fn barrier_box(params: &ProblemParams, k_under: f64, k_over: f64) -> Result<BarrierBox> {
    if !(k_under > 0.0) || !(k_over >= k_under) || !k_over.is_finite() {
        return Err(Error::Argument(format!("need 0 < K_under <= K_over, got ({k_under}, {k_over})")));
    }
    let g_over = gamma_apex(params, k_over);
    let gx = g_over.0;
    let h_under = |y: f64| energy(params, k_under, gx, y);
    let mut hi = g_over.1;
    let mut lo = hi;
    if k_under < k_over {
        while h_under(lo) <= 0.0 {
            lo *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h_under(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(BarrierBox { k_under, k_over, g_over, g_under: (gx, 0.5 * (lo + hi)) })
}

/// Classifies `(x, y)` against the box `B` of the barrier level sets.
pub fn barrier_sets(params: &ProblemParams, k_under: f64, k_over: f64, x: f64, y: f64, tol: f64) -> Result<BarrierRegion> {
    let bx = barrier_box(params, k_under, k_over)?;
    if x < 0.0 {
        return Ok(BarrierRegion::Outside);
    }
    let gx = bx.g_over.0;
    let h_over = energy(params, k_over, x, y);
    let h_under = energy(params, k_under, x, y);
    let xdot = params.alpha * x + phi(params.y_exponent(), y);
    let in_strip = x <= gx + tol && xdot <= tol;
    let on_curves = in_strip && (h_over.abs() <= tol || h_under.abs() <= tol) && h_over >= -tol && h_under <= tol;
    let on_segment = (x - gx).abs() <= tol && y <= bx.g_over.1 + tol && y >= bx.g_under.1 - tol;
    if on_curves || on_segment {
        return Ok(BarrierRegion::OnBoundary);
    }
    if x > 0.0 && x < gx && h_over > tol && h_under < -tol && xdot < 0.0 {
        Ok(BarrierRegion::InsideB)
    } else {
        Ok(BarrierRegion::Outside)
    }
}
