//! Run configuration: TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::SuiteOptions;
use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::kprofile::{parse_profile, KProfile};
use crate::params::{make_params, ProblemParams};
use crate::shooting::{Method, ShotConfig};
use crate::sweep::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub n: u32,
    pub p: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection { n: 4, p: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSection {
    /// `A + B*r^L [+ c*r^m ...]`, `const A` or `table:<path>`.
    #[serde(rename = "K")]
    pub k: String,
    pub k_under: Option<f64>,
    pub k_over: Option<f64>,
}

impl Default for ProfileSection {
    fn default() -> Self {
        ProfileSection { k: "1+r^2".into(), k_under: None, k_over: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShootSection {
    pub d: f64,
}

impl Default for ShootSection {
    fn default() -> Self {
        ShootSection { d: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
    pub seed: Option<u64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        let g = GridSpec::default();
        SweepSection { d_min: g.d_min, d_max: g.d_max, points: g.points, seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub epsilon: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub launches: usize,
    pub seed: u64,
}

impl Default for VerifySection {
    fn default() -> Self {
        let o = SuiteOptions::default();
        VerifySection { epsilon: o.epsilon, tau_min: o.tau_range.0, tau_max: o.tau_range.1, launches: o.launches, seed: o.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_budget: f64,
    pub init_rel_tol: f64,
    pub method: Method,
    /// Worker threads; 0 picks the number of cores.
    pub threads: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = ShotConfig::default();
        SolverSection {
            rel_tol: s.integrator.rel_tol,
            abs_tol: s.integrator.abs_tol,
            max_step: s.integrator.max_step,
            t_budget: s.integrator.t_budget,
            init_rel_tol: s.init_rel_tol,
            method: s.method,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from(".") }
    }
}

/// Fully resolved configuration; every output embeds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub profile: ProfileSection,
    pub solver: SolverSection,
    pub shoot: ShootSection,
    pub sweep: SweepSection,
    pub solve: SolveSection,
    pub verify: VerifySection,
    pub output: OutputSection,
}

/// Objects built from a validated configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: ProblemParams,
    pub profile: KProfile,
    pub shot: ShotConfig,
    pub grid: GridSpec,
    pub suite: SuiteOptions,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical JSON form, without the output directory and
    /// thread count, which do not change any computed number.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputSection::default();
        c.solver.threads = 0;
        let json = serde_json::to_vec(&c).expect("configuration serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn shot_config(&self) -> ShotConfig {
        let s = &self.solver;
        ShotConfig {
            integrator: IntegratorConfig {
                rel_tol: s.rel_tol,
                abs_tol: s.abs_tol,
                max_step: s.max_step,
                t_budget: s.t_budget,
                ..IntegratorConfig::default()
            },
            init_rel_tol: s.init_rel_tol,
            method: s.method,
            keep_trajectory: false,
        }
    }

    /// Checks everything that does not depend on the command.
    pub fn resolve(&self) -> Result<Resolved> {
        let params = make_params(self.params.n, self.params.p)?;
        let mut profile = parse_profile(&self.profile.k)?;
        match (self.profile.k_under, self.profile.k_over) {
            (Some(lo), Some(hi)) => profile = profile.with_bounds(lo, hi)?,
            (None, None) => {}
            _ => return Err(Error::Config("k_under and k_over must be given together".into())),
        }
        let shot = self.shot_config();
        shot.integrator.validate()?;
        if !(shot.init_rel_tol > 0.0 && shot.init_rel_tol <= 1e-6) {
            return Err(Error::Config(format!("init_rel_tol = {} must lie in (0, 1e-6]", shot.init_rel_tol)));
        }
        let grid = GridSpec {
            d_min: self.sweep.d_min,
            d_max: self.sweep.d_max,
            points: self.sweep.points,
            jitter_seed: self.sweep.seed,
        };
        let v = &self.verify;
        if !(v.epsilon > 0.0) || !(v.tau_min < v.tau_max) || v.launches < 2 {
            return Err(Error::Config("verify needs epsilon > 0, tau_min < tau_max and at least 2 launches".into()));
        }
        let suite = SuiteOptions { epsilon: v.epsilon, tau_range: (v.tau_min, v.tau_max), launches: v.launches, seed: v.seed, ..SuiteOptions::default() };
        Ok(Resolved { params, profile, shot, grid, suite })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_and_hash() {
        let c = RunConfig::default();
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let mut d = c.clone();
        d.shoot.d = 2.0;
        assert_ne!(d.hash(), c.hash());
        d = c.clone();
        d.solver.threads = 8;
        d.output.dir = "elsewhere".into();
        assert_eq!(d.hash(), c.hash());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c = RunConfig::from_toml("[params]\np = 1.5\n[profile]\nK = \"1+r^3\"\n").unwrap();
        assert_eq!(c.params.n, 4);
        assert_eq!(c.params.p, 1.5);
        assert_eq!(c.profile.k, "1+r^3");
        assert!(c.resolve().is_ok());
        assert!(RunConfig::from_toml("[params]\nq = 3\n").is_err());
    }

    #[test]
    fn resolve_rejects_bad_values() {
        let mut c = RunConfig::default();
        c.params.p = 3.0;
        assert!(c.resolve().is_err());
        let mut c = RunConfig::default();
        c.solver.rel_tol = -1.0;
        assert!(c.resolve().is_err());
        let mut c = RunConfig::default();
        c.profile.k_under = Some(1.0);
        assert!(c.resolve().is_err());
    }
}
