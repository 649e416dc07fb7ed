//! Dimension and exponent bundle for the critical p-Laplace problem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalars of the problem class, all derived once from `(n, p)`.
///
/// `q` is the critical Sobolev exponent, `alpha` and `beta` are the Fowler
/// weights and `ell_star` is the flatness threshold separating the
/// subcritical and supercritical regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub ell_star: f64,
}

impl ProblemParams {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        make_params(n, p)
    }

    /// Exponent of the `y` power term, `1/(p-1)`.
    pub fn y_exponent(&self) -> f64 {
        1.0 / (self.p - 1.0)
    }

    /// Conjugate exponent `p/(p-1)`.
    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// Decay rate of `x` along the stable manifold of the origin.
    pub fn stable_decay_rate(&self) -> f64 {
        (self.n as f64 - self.p) / (self.p * (self.p - 1.0))
    }
}

pub fn make_params(n: u32, p: f64) -> Result<ProblemParams> {
    if n < 2 {
        return Err(Error::Params(format!("dimension n = {n} must be at least 2")));
    }
    if !p.is_finite() {
        return Err(Error::Params(format!("exponent p = {p} is not finite")));
    }
    let nf = n as f64;
    if p <= 1.0 {
        return Err(Error::Params(format!("p = {p} violates p > 1")));
    }
    if p >= nf {
        return Err(Error::Params(format!("p = {p} violates p < n = {n}")));
    }
    if p > 2.0 {
        return Err(Error::Params(format!("p = {p} violates p <= 2")));
    }
    // p >= 2n/(n+2) checked as p(n+2) >= 2n; the boundary value itself is admitted
    let lower = 2.0 * nf / (nf + 2.0);
    if p * (nf + 2.0) < 2.0 * nf && (lower - p) > 4.0 * f64::EPSILON * lower {
        return Err(Error::Params(format!(
            "p = {p} violates p >= 2n/(n+2) = {lower}"
        )));
    }
    let q = nf * p / (nf - p);
    let alpha = (nf - p) / p;
    let beta = nf * (p - 1.0) / p;
    let ell_star = (nf - p) / (p - 1.0);
    Ok(ProblemParams {
        n,
        p,
        q,
        alpha,
        beta,
        ell_star,
    })
}

/// Radius `R = lambda^{1/p}` equivalent to the eigenvalue `lambda`.
pub fn lambda_to_radius(lambda: f64, p: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Argument(format!("lambda = {lambda} must be positive")));
    }
    Ok(lambda.powf(1.0 / p))
}

pub fn radius_to_lambda(radius: f64, p: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Argument(format!("radius = {radius} must be positive")));
    }
    Ok(radius.powf(p))
}
