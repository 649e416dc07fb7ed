//! Curvature profiles `K(r)`, evaluated either in `r` or in `t = ln r`.
//!
//! The power-perturbed family `A + B r^ell + sum c_i r^{m_i}` (with every
//! `m_i > ell`) carries its flatness data explicitly, so the remainder
//! condition at the origin holds by construction. Truncation replaces the
//! profile right of `T0` by a saturating exponential that keeps the value and
//! slope at `T0` and tends to `A + 1`.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// One `coeff * r^exponent` term of the remainder `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTerm {
    pub coeff: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Constant,
    PowerPerturbed,
    Truncated,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq)]
struct Power {
    a: f64,
    b: f64,
    ell: f64,
    h: Vec<PowerTerm>,
}

impl Power {
    fn excess_t(&self, t: f64) -> f64 {
        self.b * (self.ell * t).exp()
            + self.h.iter().map(|h| h.coeff * (h.exponent * t).exp()).sum::<f64>()
    }

    fn dk_dt(&self, t: f64) -> f64 {
        self.b * self.ell * (self.ell * t).exp()
            + self
                .h
                .iter()
                .map(|h| h.coeff * h.exponent * (h.exponent * t).exp())
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Truncation {
    t_hat0: f64,
    limit: f64,
    k_at: f64,
    rate: f64,
}

/// Monotone (Fritsch-Carlson) cubic Hermite interpolant in `t`.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    t: Vec<f64>,
    k: Vec<f64>,
    slope: Vec<f64>,
}

impl Table {
    fn new(t: Vec<f64>, k: Vec<f64>) -> Result<Self> {
        let m = t.len();
        if m < 2 || k.len() != m {
            return Err(Error::Profile("table needs at least two (r, K) rows".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Profile("table radii must be strictly increasing".into()));
        }
        if k.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Profile("table values of K must be positive".into()));
        }
        let secant: Vec<f64> = (0..m - 1).map(|i| (k[i + 1] - k[i]) / (t[i + 1] - t[i])).collect();
        let mut slope = vec![0.0; m];
        slope[0] = secant[0];
        slope[m - 1] = secant[m - 2];
        for i in 1..m - 1 {
            slope[i] = if secant[i - 1] * secant[i] <= 0.0 {
                0.0
            } else {
                0.5 * (secant[i - 1] + secant[i])
            };
        }
        for i in 0..m - 1 {
            if secant[i] == 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            let a = slope[i] / secant[i];
            let b = slope[i + 1] / secant[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slope[i] = tau * a * secant[i];
                slope[i + 1] = tau * b * secant[i];
            }
        }
        Ok(Table { t, k, slope })
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        let m = self.t.len();
        if t <= self.t[0] {
            return (self.k[0], 0.0);
        }
        if t >= self.t[m - 1] {
            return (self.k[m - 1], 0.0);
        }
        let i = match self.t.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(m - 2),
            Err(i) => i - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let s = (t - self.t[i]) / h;
        let (y0, y1, d0, d1) = (self.k[i], self.k[i + 1], self.slope[i], self.slope[i + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let val = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
        let dh00 = 6.0 * s * s - 6.0 * s;
        let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
        let dh01 = -6.0 * s * s + 6.0 * s;
        let dh11 = 3.0 * s * s - 2.0 * s;
        let der = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
        (val, der)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Constant(f64),
    Power(Power),
    Truncated(Power, Truncation),
    Tabulated(Table),
}

/// Curvature function `K`, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct KProfile {
    repr: Repr,
    bounds: Option<(f64, f64)>,
}

const BOUND_GRID: (f64, f64) = (-50.0, 50.0);

fn sample_grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}

impl KProfile {
    pub fn constant(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Profile(format!("constant K = {a} must be positive")));
        }
        Ok(KProfile { repr: Repr::Constant(a), bounds: None })
    }

    /// `A + B r^ell + sum h_i`, every remainder exponent strictly above `ell`.
    pub fn power(a: f64, b: f64, ell: f64, h: Vec<PowerTerm>) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Profile(format!("A = {a} must be positive (K may not vanish at 0)")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Profile(format!("B = {b} must be positive")));
        }
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::Profile(format!("flatness order ell = {ell} must be positive")));
        }
        for term in &h {
            if !term.coeff.is_finite() || !(term.exponent > ell) || !term.exponent.is_finite() {
                return Err(Error::Profile(format!(
                    "remainder term {}*r^{} needs exponent > ell = {ell}",
                    term.coeff, term.exponent
                )));
            }
        }
        let profile = KProfile { repr: Repr::Power(Power { a, b, ell, h }), bounds: None };
        profile.check_positive()?;
        Ok(profile)
    }

    /// Tabulated profile from `(r, K)` rows, `r > 0` increasing.
    pub fn tabulated(rows: &[(f64, f64)]) -> Result<Self> {
        if rows.iter().any(|&(r, _)| !(r > 0.0)) {
            return Err(Error::Profile("table radii must be positive".into()));
        }
        let t = rows.iter().map(|&(r, _)| r.ln()).collect();
        let k = rows.iter().map(|&(_, k)| k).collect();
        Ok(KProfile { repr: Repr::Tabulated(Table::new(t, k)?), bounds: None })
    }

    /// Reads a whitespace or comma separated two-column `r K` table.
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::Profile(format!("{}:{}: cannot parse '{s}'", path.display(), lineno + 1))
                })
            };
            if cols.len() != 2 {
                // tolerate a single header row
                if rows.is_empty() && cols.iter().any(|c| c.parse::<f64>().is_err()) {
                    continue;
                }
                return Err(Error::Profile(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )));
            }
            rows.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::tabulated(&rows)
    }

    fn check_positive(&self) -> Result<()> {
        for t in sample_grid(BOUND_GRID.0, BOUND_GRID.1, 0.05) {
            let (k, _) = self.eval_t(t);
            if !(k > 0.0) {
                return Err(Error::Profile(format!("K(e^{t:.2}) = {k} is not positive")));
            }
        }
        Ok(())
    }

    /// Attach explicit barrier bounds `K_under <= K <= K_over`.
    pub fn with_bounds(mut self, k_under: f64, k_over: f64) -> Result<Self> {
        if !(k_under > 0.0) || !(k_over >= k_under) {
            return Err(Error::Profile(format!(
                "bounds need 0 < K_under <= K_over, got ({k_under}, {k_over})"
            )));
        }
        let slack = 1e-12 * k_over;
        for t in sample_grid(BOUND_GRID.0, BOUND_GRID.1, 0.05) {
            let (k, _) = self.eval_t(t);
            if k < k_under - slack || k > k_over + slack {
                return Err(Error::Profile(format!(
                    "K(e^{t:.2}) = {k} lies outside the claimed bounds [{k_under}, {k_over}]"
                )));
            }
        }
        self.bounds = Some((k_under, k_over));
        Ok(self)
    }

    pub fn kind(&self) -> ProfileKind {
        match self.repr {
            Repr::Constant(_) => ProfileKind::Constant,
            Repr::Power(_) => ProfileKind::PowerPerturbed,
            Repr::Truncated(..) => ProfileKind::Truncated,
            Repr::Tabulated(_) => ProfileKind::Tabulated,
        }
    }

    /// `K(-inf)`, i.e. `A` for the power families.
    pub fn a(&self) -> f64 {
        match &self.repr {
            Repr::Constant(a) => *a,
            Repr::Power(p) | Repr::Truncated(p, _) => p.a,
            Repr::Tabulated(tab) => tab.k[0],
        }
    }

    pub fn b(&self) -> Option<f64> {
        self.power_part().map(|p| p.b)
    }

    /// Flatness order at the origin, when the profile carries one.
    pub fn ell(&self) -> Option<f64> {
        self.power_part().map(|p| p.ell)
    }

    pub fn h_terms(&self) -> &[PowerTerm] {
        self.power_part().map(|p| p.h.as_slice()).unwrap_or(&[])
    }

    /// `(T0, limit)` of a truncated profile.
    pub fn truncation(&self) -> Option<(f64, f64)> {
        match &self.repr {
            Repr::Truncated(_, tr) => Some((tr.t_hat0, tr.limit)),
            _ => None,
        }
    }

    fn power_part(&self) -> Option<&Power> {
        match &self.repr {
            Repr::Power(p) | Repr::Truncated(p, _) => Some(p),
            _ => None,
        }
    }

    /// Terms `(coeff, exponent)` of `K - A` valid for `t <= t_max`, where the
    /// profile is a finite sum of powers.
    pub fn power_terms(&self) -> Option<(Vec<PowerTerm>, f64)> {
        let p = self.power_part()?;
        let mut terms = vec![PowerTerm { coeff: p.b, exponent: p.ell }];
        terms.extend(p.h.iter().copied());
        let t_max = match &self.repr {
            Repr::Truncated(_, tr) => tr.t_hat0,
            _ => f64::INFINITY,
        };
        Some((terms, t_max))
    }

    /// `(K, dK/dt)` at log-radius `t`.
    pub fn eval_t(&self, t: f64) -> (f64, f64) {
        match &self.repr {
            Repr::Constant(a) => (*a, 0.0),
            Repr::Power(p) => (p.a + p.excess_t(t), p.dk_dt(t)),
            Repr::Truncated(p, tr) => {
                if t <= tr.t_hat0 {
                    (p.a + p.excess_t(t), p.dk_dt(t))
                } else {
                    let gap = (tr.limit - tr.k_at) * (-tr.rate * (t - tr.t_hat0)).exp();
                    (tr.limit - gap, tr.rate * gap)
                }
            }
            Repr::Tabulated(tab) => tab.eval(t),
        }
    }

    /// `K(t) - K(-inf)` without cancellation for the power families.
    pub fn excess_t(&self, t: f64) -> f64 {
        match &self.repr {
            Repr::Constant(_) => 0.0,
            Repr::Power(p) => p.excess_t(t),
            Repr::Truncated(p, tr) => {
                if t <= tr.t_hat0 {
                    p.excess_t(t)
                } else {
                    (tr.limit - p.a) - (tr.limit - tr.k_at) * (-tr.rate * (t - tr.t_hat0)).exp()
                }
            }
            Repr::Tabulated(tab) => tab.eval(t).0 - tab.k[0],
        }
    }

    /// `(K, dK/dr)` at radius `r >= 0`; at `r = 0` the derivative is the
    /// one-sided limit (infinite when `ell < 1`).
    pub fn eval_r(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Argument(format!("radius r = {r} must be non-negative")));
        }
        if r == 0.0 {
            let der = match self.power_part() {
                Some(p) if p.ell > 1.0 => 0.0,
                Some(p) if p.ell == 1.0 => p.b,
                Some(_) => f64::INFINITY,
                None => 0.0,
            };
            return Ok((self.a(), der));
        }
        match &self.repr {
            Repr::Power(p) => {
                let mut k = p.a + p.b * r.powf(p.ell);
                let mut dk = p.b * p.ell * r.powf(p.ell - 1.0);
                for h in &p.h {
                    k += h.coeff * r.powf(h.exponent);
                    dk += h.coeff * h.exponent * r.powf(h.exponent - 1.0);
                }
                Ok((k, dk))
            }
            _ => {
                let (k, kt) = self.eval_t(r.ln());
                Ok((k, kt / r))
            }
        }
    }

    /// `K(+inf)` when it is finite.
    pub fn limit_plus_inf(&self) -> Option<f64> {
        match &self.repr {
            Repr::Constant(a) => Some(*a),
            Repr::Power(_) => None,
            Repr::Truncated(_, tr) => Some(tr.limit),
            Repr::Tabulated(tab) => tab.k.last().copied(),
        }
    }

    /// Barrier bounds `(K_under, K_over)`: explicit ones if attached, exact
    /// `(A, A+1)` for truncated profiles, otherwise inf/sup over a sample grid
    /// widened by 10%. `None` for profiles unbounded above.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        if let Some(b) = self.bounds {
            return Some(b);
        }
        match &self.repr {
            Repr::Power(_) => None,
            Repr::Truncated(p, tr) => Some((p.a, tr.limit)),
            _ => {
                let (lo, hi) = sample_grid(BOUND_GRID.0, BOUND_GRID.1, 0.05)
                    .map(|t| self.eval_t(t).0)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(k), hi.max(k)));
                Some((0.9 * lo, 1.1 * hi))
            }
        }
    }

    /// Sampled surrogate for monotonicity: `dK/dt >= 0` on a dense grid.
    pub fn is_increasing(&self) -> bool {
        sample_grid(BOUND_GRID.0, BOUND_GRID.1, 0.01).all(|t| self.eval_t(t).1 >= 0.0)
    }

    /// `(|h(r)| + r|h'(r)|) / r^ell`.
    pub fn remainder_ratio(&self, r: f64) -> Option<f64> {
        let p = self.power_part()?;
        let (h, rh) = p.h.iter().fold((0.0, 0.0), |(h, rh), term| {
            let v = term.coeff * r.powf(term.exponent);
            (h + v, rh + term.exponent * v)
        });
        Some((h.abs() + rh.abs()) / r.powf(p.ell))
    }

    /// Largest `T0` on the grid `{-0.25 k}` for which the slope sandwich
    /// `B ell e^{ell t}/2 < dK/dt < 2 B ell e^{ell t}` holds on a verification
    /// grid over `]-inf, T0]` and `K(T0) < A + 1`.
    pub fn check_tzero_window(&self) -> Result<f64> {
        let Repr::Power(p) = &self.repr else {
            return Err(Error::Precondition(
                "the T0 window is defined for power-perturbed profiles only".into(),
            ));
        };
        for k in 1..=240 {
            let t0 = -0.25 * k as f64;
            if self.tzero_holds(p, t0) {
                return Ok(t0);
            }
        }
        Err(Error::Precondition("no grid value of T0 satisfies the slope sandwich".into()))
    }

    fn tzero_holds(&self, p: &Power, t0: f64) -> bool {
        if !(p.a + p.excess_t(t0) < p.a + 1.0) {
            return false;
        }
        sample_grid(t0 - 60.0, t0, 0.05).all(|t| {
            let lead = p.b * p.ell * (p.ell * t).exp();
            let kt = p.dk_dt(t);
            0.5 * lead < kt && kt < 2.0 * lead
        })
    }

    /// C^1 increasing saturating modification equal to `self` on `t <= T0`
    /// with limit `A + 1`.
    pub fn truncate(&self, t_hat0: f64) -> Result<KProfile> {
        let Repr::Power(p) = &self.repr else {
            return Err(Error::Precondition(
                "truncation needs a power-perturbed profile (B and ell defined)".into(),
            ));
        };
        if !t_hat0.is_finite() || !self.tzero_holds(p, t_hat0) {
            return Err(Error::Precondition(format!(
                "T0 = {t_hat0} violates the slope sandwich or K(T0) < A + 1"
            )));
        }
        let limit = p.a + 1.0;
        let k_at = p.a + p.excess_t(t_hat0);
        let rate = p.dk_dt(t_hat0) / (limit - k_at);
        Ok(KProfile {
            repr: Repr::Truncated(p.clone(), Truncation { t_hat0, limit, k_at, rate }),
            bounds: None,
        })
    }

    /// Profile of the rescaled problem `K_s(s) = lambda * K(radius * s)`.
    pub fn rescaled(&self, lambda: f64, radius: f64) -> KProfile {
        let shift = radius.ln();
        let scale_power = |p: &Power| Power {
            a: lambda * p.a,
            b: lambda * p.b * radius.powf(p.ell),
            ell: p.ell,
            h: p.h
                .iter()
                .map(|h| PowerTerm { coeff: lambda * h.coeff * radius.powf(h.exponent), exponent: h.exponent })
                .collect(),
        };
        let repr = match &self.repr {
            Repr::Constant(a) => Repr::Constant(lambda * a),
            Repr::Power(p) => Repr::Power(scale_power(p)),
            Repr::Truncated(p, tr) => Repr::Truncated(
                scale_power(p),
                Truncation {
                    t_hat0: tr.t_hat0 - shift,
                    limit: lambda * tr.limit,
                    k_at: lambda * tr.k_at,
                    rate: tr.rate,
                },
            ),
            Repr::Tabulated(tab) => Repr::Tabulated(Table {
                t: tab.t.iter().map(|t| t - shift).collect(),
                k: tab.k.iter().map(|k| lambda * k).collect(),
                slope: tab.slope.iter().map(|s| lambda * s).collect(),
            }),
        };
        KProfile { repr, bounds: self.bounds.map(|(lo, hi)| (lambda * lo, lambda * hi)) }
    }

    /// Serializable description for output headers.
    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            kind: self.kind(),
            expression: self.to_string(),
            a: self.a(),
            b: self.b(),
            ell: self.ell(),
            h_terms: self.h_terms().to_vec(),
            truncation: self.truncation(),
            bounds: self.bounds(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub kind: ProfileKind,
    pub expression: String,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub ell: Option<f64>,
    pub h_terms: Vec<PowerTerm>,
    pub truncation: Option<(f64, f64)>,
    pub bounds: Option<(f64, f64)>,
}

impl fmt::Display for KProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_power = |f: &mut fmt::Formatter<'_>, p: &Power| -> fmt::Result {
            write!(f, "{}+{}*r^{}", p.a, p.b, p.ell)?;
            for h in &p.h {
                if h.coeff < 0.0 {
                    write!(f, "-{}*r^{}", -h.coeff, h.exponent)?;
                } else {
                    write!(f, "+{}*r^{}", h.coeff, h.exponent)?;
                }
            }
            Ok(())
        };
        match &self.repr {
            Repr::Constant(a) => write!(f, "const {a}"),
            Repr::Power(p) => write_power(f, p),
            Repr::Truncated(p, tr) => {
                write_power(f, p)?;
                write!(f, " truncated at T0={}", tr.t_hat0)
            }
            Repr::Tabulated(tab) => write!(f, "table[{} rows]", tab.t.len()),
        }
    }
}

/// Parses the profile mini-language: `const A`, `table:<path>`, or a sum of
/// terms `c`, `c*r`, `c*r^m`, `r^m` such as `1 + r^2 - 0.5*r^4`.
pub fn parse_profile(text: &str) -> Result<KProfile> {
    let s = text.trim();
    if let Some(rest) = s.strip_prefix("table:") {
        return KProfile::from_table_file(Path::new(rest.trim()));
    }
    if let Some(rest) = s.strip_prefix("const") {
        let rest = rest.trim().trim_start_matches('(').trim_end_matches(')').trim();
        let a = rest
            .parse::<f64>()
            .map_err(|_| Error::Profile(format!("cannot parse constant '{rest}'")))?;
        return KProfile::constant(a);
    }
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Profile("empty profile expression".into()));
    }
    let mut terms: Vec<(f64, Option<f64>)> = Vec::new();
    let bytes = compact.as_bytes();
    let mut start = 0;
    for i in 1..=bytes.len() {
        let split = i == bytes.len()
            || ((bytes[i] == b'+' || bytes[i] == b'-')
                && !matches!(bytes[i - 1], b'e' | b'E' | b'^' | b'*'));
        if split {
            terms.push(parse_term(&compact[start..i])?);
            start = i;
        }
    }
    let a: f64 = terms.iter().filter(|t| t.1.is_none()).map(|t| t.0).sum();
    let mut powers: Vec<PowerTerm> = terms
        .iter()
        .filter_map(|&(c, m)| m.map(|m| PowerTerm { coeff: c, exponent: m }))
        .collect();
    if powers.is_empty() {
        return KProfile::constant(a);
    }
    powers.sort_by(|x, y| x.exponent.partial_cmp(&y.exponent).unwrap());
    // merge equal exponents
    let mut merged: Vec<PowerTerm> = Vec::new();
    for term in powers {
        match merged.last_mut() {
            Some(last) if last.exponent == term.exponent => last.coeff += term.coeff,
            _ => merged.push(term),
        }
    }
    let lead = merged.remove(0);
    KProfile::power(a, lead.coeff, lead.exponent, merged)
}

fn parse_term(term: &str) -> Result<(f64, Option<f64>)> {
    let bad = || Error::Profile(format!("cannot parse term '{term}'"));
    let (sign, body) = match term.as_bytes().first() {
        Some(b'+') => (1.0, &term[1..]),
        Some(b'-') => (-1.0, &term[1..]),
        _ => (1.0, term),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let Some(pos) = body.find('r') else {
        return Ok((sign * body.parse::<f64>().map_err(|_| bad())?, None));
    };
    let coeff = match body[..pos].strip_suffix('*') {
        Some(c) => c.parse::<f64>().map_err(|_| bad())?,
        None if pos == 0 => 1.0,
        None => return Err(bad()),
    };
    let rest = &body[pos + 1..];
    let exponent = if rest.is_empty() {
        1.0
    } else {
        let e = rest.strip_prefix('^').ok_or_else(bad)?;
        e.trim_start_matches('(').trim_end_matches(')').parse::<f64>().map_err(|_| bad())?
    };
    Ok((sign * coeff, Some(exponent)))
}
