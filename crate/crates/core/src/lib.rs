//! Shooting laboratory for radial solutions of the critical p-Laplace scalar
//! curvature equation
//!
//! ```text
//! (r^{n-1} u'|u'|^{p-2})' + r^{n-1} K(r) u|u|^{q-2} = 0,   q = np/(n-p)
//! ```
//!
//! Regular solutions `u(0) = d`, `u'(0) = 0` are integrated in Fowler
//! coordinates `t = ln r`, `x = u r^alpha`, `y = u'|u'|^{p-2} r^beta`, which
//! turns the radial equation into a planar non-autonomous system. The crate
//! computes the first-zero map `d -> R(d)`, its bifurcation diagram, the
//! solution counts for the Dirichlet problem on a ball, and a set of
//! energy/time diagnostics along computed trajectories.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod diagnostics;
pub mod dynsys;
pub mod error;
pub mod fowler;
pub mod integrate;
pub mod kprofile;
pub mod params;
pub mod shooting;
pub mod sweep;

pub use dynsys::{Drive, FrozenSpec, Homoclinic};
pub use error::{Error, Result};
pub use fowler::{PhaseState, RadialState};
pub use integrate::{Event, EventKind, Frame, IntegratorConfig, Trajectory, Watch};
pub use kprofile::{parse_profile, KProfile, PowerTerm, ProfileKind};
pub use params::{make_params, ProblemParams};
pub use shooting::{Outcome, ShotConfig, ShotResult, Trend};

pub use sweep::{BifurcationDiagram, GridSpec, Regime};
