//! Bifurcation diagram `d -> R(d)`, the fold `R0` and root counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kprofile::KProfile;
use crate::params::{lambda_to_radius, ProblemParams};
use crate::shooting::{shoot, value_at_radius, ShotConfig, ShotResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    /// Declared from `ell` against `ell*`; `None` when the profile has no order of flatness.
    pub fn declare(params: &ProblemParams, ell: Option<f64>) -> Option<Regime> {
        let ell = ell?;
        let tol = 1e-12 * params.ell_star;
        Some(if ell < params.ell_star - tol {
            Regime::Subcritical
        } else if ell > params.ell_star + tol {
            Regime::Supercritical
        } else {
            Regime::Critical
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        }
    }
}

/// Geometric grid of initial values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
    /// Interior nodes are moved by up to a quarter of the log spacing.
    pub jitter_seed: Option<u64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { d_min: 1e-2, d_max: 1e6, points: 64, jitter_seed: None }
    }
}

impl GridSpec {
    pub fn new(d_min: f64, d_max: f64, points: usize) -> Result<Self> {
        let g = GridSpec { d_min, d_max, points, jitter_seed: None };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_min > 0.0 && self.d_max.is_finite() && self.d_max > self.d_min) {
            return Err(Error::Argument(format!("bad grid range [{}, {}]", self.d_min, self.d_max)));
        }
        if self.points < 8 {
            return Err(Error::Argument(format!("grid needs at least 8 points, got {}", self.points)));
        }
        if (self.d_max / self.d_min).log10() < 3.0 - 1e-12 {
            return Err(Error::Argument("grid must span at least 3 decades".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = (self.d_min.ln(), self.d_max.ln());
        let step = (hi - lo) / (self.points - 1) as f64;
        let mut rng = self.jitter_seed.map(ChaCha8Rng::seed_from_u64);
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.d_min;
                }
                if i == self.points - 1 {
                    return self.d_max;
                }
                let shift = rng.as_mut().map_or(0.0, |r| r.gen_range(-0.25..0.25) * step);
                (lo + i as f64 * step + shift).exp()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct DiagramPoint {
    pub d: f64,
    pub shot: Option<ShotResult>,
    /// Error message of a failed shot.
    pub failure: Option<String>,
}

impl DiagramPoint {
    pub fn radius(&self) -> Option<f64> {
        self.shot.as_ref().and_then(|s| s.outcome.radius())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailStats {
    /// Least-squares slope of `ln R` against `ln d` over the last decade.
    pub slope: Option<f64>,
    pub min: Option<f64>,
    pub monotone_decreasing: bool,
    pub monotone_increasing: bool,
    /// Minimum of `R` over the decade centred (in log scale) on the grid.
    pub middle_min: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BifurcationDiagram {
    pub params: ProblemParams,
    pub profile: KProfile,
    pub cfg: ShotConfig,
    pub points: Vec<DiagramPoint>,
    pub ell: Option<f64>,
    pub ell_star: f64,
    pub regime: Option<Regime>,
    pub tail: TailStats,
    /// Tail behaviour agrees with the declared regime.
    pub regime_consistent: Option<bool>,
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))
}

/// Shoots every `d` of the grid in parallel; results keep input order.
pub fn sweep_r(params: &ProblemParams, profile: &KProfile, grid: &GridSpec, cfg: &ShotConfig, threads: usize) -> Result<BifurcationDiagram> {
    grid.validate()?;
    cfg.integrator.validate()?;
    let ds = grid.values();
    let cfg = ShotConfig { keep_trajectory: false, ..*cfg };
    let points: Vec<DiagramPoint> = pool(threads)?.install(|| {
        ds.par_iter()
            .map(|&d| match shoot(params, profile, d, &cfg) {
                Ok(shot) => DiagramPoint { d, shot: Some(shot), failure: None },
                Err(e) => DiagramPoint { d, shot: None, failure: Some(e.to_string()) },
            })
            .collect()
    });
    Ok(assemble(params, profile, cfg, points))
}

pub fn assemble(params: &ProblemParams, profile: &KProfile, cfg: ShotConfig, points: Vec<DiagramPoint>) -> BifurcationDiagram {
    let tail = tail_stats(&points);
    let ell = profile.ell();
    let regime = Regime::declare(params, ell);
    let regime_consistent = regime.map(|r| match (r, tail.slope, tail.min) {
        (Regime::Subcritical, Some(s), _) => s < 0.0 && tail.monotone_decreasing,
        (Regime::Supercritical, Some(s), _) => s > 0.0,
        (Regime::Critical, _, Some(m)) => m > 0.0 && tail.middle_min.is_some_and(|mm| m >= 0.5 * mm),
        _ => false,
    });
    BifurcationDiagram {
        params: *params,
        profile: profile.clone(),
        cfg,
        points,
        ell,
        ell_star: params.ell_star,
        regime,
        tail,
        regime_consistent,
    }
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    slope(pts)
}

fn tail_stats(points: &[DiagramPoint]) -> TailStats {
    let Some(last) = points.last() else {
        return TailStats { slope: None, min: None, monotone_decreasing: false, monotone_increasing: false, middle_min: None };
    };
    let first = points[0].d;
    let cut = last.d / 10.0 * (1.0 - 1e-12);
    let tail: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.d >= cut)
        .filter_map(|p| p.radius().map(|r| (p.d, r)))
        .collect();
    let logs: Vec<(f64, f64)> = tail.iter().map(|&(d, r)| (d.ln(), r.ln())).collect();
    let centre = (first.ln() + last.d.ln()) / 2.0;
    let half = 0.5 * std::f64::consts::LN_10;
    let middle_min = points
        .iter()
        .filter(|p| (p.d.ln() - centre).abs() <= half)
        .filter_map(|p| p.radius())
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))));
    let all_crossing = tail.len() == points.iter().filter(|p| p.d >= cut).count();
    TailStats {
        slope: slope(&logs),
        min: tail.iter().map(|t| t.1).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r)))),
        monotone_decreasing: all_crossing && tail.windows(2).all(|w| w[1].1 < w[0].1),
        monotone_increasing: all_crossing && tail.windows(2).all(|w| w[1].1 > w[0].1),
        middle_min,
    }
}

/// Minimum of `R` over the diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldPoint {
    pub r0: f64,
    pub d0: f64,
    /// The discrete minimum sits at an end of the grid; no interior fold.
    pub boundary: bool,
}

fn radius_at(diagram: &BifurcationDiagram, d: f64) -> Option<f64> {
    shoot(&diagram.params, &diagram.profile, d, &diagram.cfg).ok().and_then(|s| s.outcome.radius())
}

pub fn find_r0(diagram: &BifurcationDiagram) -> Option<FoldPoint> {
    let (i, r) = diagram
        .points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.radius().map(|r| (i, r)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let pts = &diagram.points;
    let d = pts[i].d;
    let neighbours = (i > 0 && pts[i - 1].radius().is_some(), i + 1 < pts.len() && pts[i + 1].radius().is_some());
    if !(neighbours.0 && neighbours.1) {
        return Some(FoldPoint { r0: r, d0: d, boundary: true });
    }
    let f = |s: f64| radius_at(diagram, s.exp()).unwrap_or(f64::INFINITY);
    let (mut a, mut b) = (pts[i - 1].d.ln(), pts[i + 1].d.ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut e = a + g * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    while b - a > 1e-7 {
        if fc < fe {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = f(e);
        }
    }
    let (s, v) = if fc < fe { (c, fc) } else { (e, fe) };
    if v < r {
        Some(FoldPoint { r0: v, d0: s.exp(), boundary: false })
    } else {
        Some(FoldPoint { r0: r, d0: d, boundary: false })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootReport {
    pub target_radius: f64,
    pub roots: Vec<f64>,
    /// The target lies within `1e-3` relative of the minimum of `R`.
    pub near_fold: bool,
    pub warnings: Vec<String>,
}

/// All `d` with `R(d) = target`, bracketed on the diagram and refined by bisection.
pub fn solve_radius(diagram: &BifurcationDiagram, target: f64) -> Result<RootReport> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Argument(format!("target radius {target} must be positive")));
    }
    let mut warnings = Vec::new();
    let min_r = diagram.points.iter().filter_map(|p| p.radius()).fold(f64::INFINITY, f64::min);
    let near_fold = ((target - min_r) / min_r).abs() <= 1e-3;
    if near_fold {
        warnings.push(format!("target {target} is within 1e-3 of the diagram minimum {min_r}; the count is unreliable"));
    }
    let mut roots: Vec<f64> = Vec::new();
    for w in diagram.points.windows(2) {
        let (Some(ra), Some(rb)) = (w[0].radius(), w[1].radius()) else {
            continue;
        };
        let (ga, gb) = (ra - target, rb - target);
        if ga == 0.0 {
            roots.push(w[0].d);
            continue;
        }
        if ga * gb >= 0.0 {
            continue;
        }
        let (mut lo, mut hi) = (w[0].d.ln(), w[1].d.ln());
        let mut glo = ga;
        while hi - lo > 1e-8 {
            let mid = 0.5 * (lo + hi);
            let Some(r) = radius_at(diagram, mid.exp()) else {
                warnings.push(format!("shot at d = {} lost its crossing while bisecting", mid.exp()));
                break;
            };
            let g = r - target;
            if g == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if g * glo > 0.0 {
                lo = mid;
                glo = g;
            } else {
                hi = mid;
            }
        }
        roots.push((0.5 * (lo + hi)).exp());
    }
    if let Some(last) = diagram.points.last() {
        if last.radius() == Some(target) {
            roots.push(last.d);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= 1e-6 * a.abs());
    Ok(RootReport { target_radius: target, roots, near_fold, warnings })
}

/// Direct check of one eigenvalue root on the rescaled unit-ball problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenCheck {
    pub d: f64,
    /// `w(1)` for `w(s) = u(lambda^{1/p} s)`.
    pub w_at_one: f64,
    pub relative: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    pub lambda: f64,
    pub radius: RootReport,
    pub check: Option<EigenCheck>,
}

pub fn solve_eigenvalue(diagram: &BifurcationDiagram, lambda: f64) -> Result<EigenReport> {
    let radius = lambda_to_radius(lambda, diagram.params.p)?;
    let report = solve_radius(diagram, radius)?;
    let check = match report.roots.first() {
        Some(&d) => Some(eigen_check(diagram, lambda, radius, d)?),
        None => None,
    };
    Ok(EigenReport { lambda, radius: report, check })
}

pub fn eigen_check(diagram: &BifurcationDiagram, lambda: f64, radius: f64, d: f64) -> Result<EigenCheck> {
    let scaled = diagram.profile.rescaled(lambda, radius);
    let w = value_at_radius(&diagram.params, &scaled, d, 1.0, &diagram.cfg)?;
    let relative = w.abs() / d;
    Ok(EigenCheck { d, w_at_one: w, relative, pass: relative <= 1e-6 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kprofile::parse_profile;
    use crate::params::make_params;

    #[test]
    fn grid_values() {
        let g = GridSpec::new(1e-2, 1e6, 64).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 64);
        assert_eq!((v[0], v[63]), (1e-2, 1e6));
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        let j = GridSpec { jitter_seed: Some(7), ..g };
        assert_eq!(j.values(), j.values());
        assert_ne!(j.values(), v);
        assert!(j.values().windows(2).all(|w| w[1] > w[0]));
        assert!(GridSpec::new(1.0, 10.0, 64).is_err());
        assert!(GridSpec::new(1e-2, 1e6, 4).is_err());
    }

    #[test]
    fn regime_from_flatness() {
        let pr = make_params(4, 2.0).unwrap();
        assert_eq!(Regime::declare(&pr, Some(1.0)), Some(Regime::Subcritical));
        assert_eq!(Regime::declare(&pr, Some(2.0)), Some(Regime::Critical));
        assert_eq!(Regime::declare(&pr, Some(3.0)), Some(Regime::Supercritical));
        assert_eq!(Regime::declare(&pr, None), None);
    }

    #[test]
    fn constant_profile_has_no_fold() {
        let pr = make_params(4, 2.0).unwrap();
        let k = parse_profile("const 1").unwrap();
        let dia = sweep_r(&pr, &k, &GridSpec::new(1e-1, 1e2, 8).unwrap(), &ShotConfig::default(), 2).unwrap();
        assert!(dia.points.iter().all(|p| p.radius().is_none()));
        assert_eq!(find_r0(&dia), None);
        assert_eq!(solve_radius(&dia, 1.0).unwrap().roots, Vec::<f64>::new());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let pr = make_params(4, 2.0).unwrap();
        let k = parse_profile("1+r^3").unwrap();
        let g = GridSpec::new(1e-1, 1e2, 8).unwrap();
        let a = sweep_r(&pr, &k, &g, &ShotConfig::default(), 1).unwrap();
        let b = sweep_r(&pr, &k, &g, &ShotConfig::default(), 4).unwrap();
        let ra: Vec<_> = a.points.iter().map(|p| p.radius()).collect();
        let rb: Vec<_> = b.points.iter().map(|p| p.radius()).collect();
        assert_eq!(ra, rb);
    }
}
