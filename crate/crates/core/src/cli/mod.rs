//! Command-line front end.

pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{run_suite, Status};
use crate::error::{Error, Result};
use crate::shooting::{shoot, Method, Outcome, ShotConfig};
use crate::sweep::{find_r0, solve_eigenvalue, solve_radius, sweep_r, BifurcationDiagram};

use config::{Resolved, RunConfig};
use output::{Meta, ShotJson, Summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fowler-shoot", version, about = "Radial shooting for the critical p-Laplace scalar curvature equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one regular solution u(r; d).
    Shoot(ShootArgs),
    /// Sweep d over a geometric grid and locate the fold R0.
    Sweep(SweepArgs),
    /// Count Dirichlet solutions on a ball of radius R or for an eigenvalue lambda.
    Solve(SolveArgs),
    /// Run the diagnostics suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Curvature profile, e.g. "1+r^2", "const 1" or "table:k.csv".
    #[arg(long = "K")]
    pub k: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub k_under: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k_over: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub abs_tol: Option<f64>,
    /// Integration budget in t = ln r.
    #[arg(long, allow_negative_numbers = true)]
    pub budget: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub init_rel_tol: Option<f64>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "deviation" => Ok(Method::Deviation),
        "direct" => Ok(Method::Direct),
        _ => Err(format!("unknown method {s:?} (deviation | direct)")),
    }
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub d_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Seed for jittering interior grid nodes.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long = "R", allow_negative_numbers = true)]
    pub radius: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub launches: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        set(&mut c.params.n, self.n);
        set(&mut c.params.p, self.p);
        set(&mut c.profile.k, self.k.clone());
        if self.k_under.is_some() {
            c.profile.k_under = self.k_under;
        }
        if self.k_over.is_some() {
            c.profile.k_over = self.k_over;
        }
        set(&mut c.solver.rel_tol, self.rel_tol);
        set(&mut c.solver.abs_tol, self.abs_tol);
        set(&mut c.solver.t_budget, self.budget);
        set(&mut c.solver.init_rel_tol, self.init_rel_tol);
        set(&mut c.solver.method, self.method);
        set(&mut c.solver.threads, self.threads);
        set(&mut c.output.dir, self.out.clone());
        Ok(c)
    }
}

impl GridArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.sweep.d_min, self.d_min);
        set(&mut c.sweep.d_max, self.d_max);
        set(&mut c.sweep.points, self.points);
        if self.seed.is_some() {
            c.sweep.seed = self.seed;
        }
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Params(_) | Error::Profile(_) | Error::Argument(_) | Error::Config(_) | Error::Io(_) => EXIT_CONFIG,
        Error::Precondition(_) | Error::NotReached(_) | Error::Divergence(_) | Error::RootFind(_) => EXIT_NUMERIC,
    }
}

/// Parses `std::env::args` and runs the command.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Shoot(a) => cmd_shoot(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn threads(c: &RunConfig) -> usize {
    if c.solver.threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        c.solver.threads
    }
}

fn setup(c: &RunConfig) -> Result<(Resolved, Meta)> {
    let r = c.resolve()?;
    output::prepare_dir(&c.output.dir)?;
    let meta = Meta::new(c, &r.params, &r.profile);
    Ok((r, meta))
}

pub fn cmd_shoot(args: &ShootArgs) -> Result<i32> {
    let mut c = args.common.load()?;
    set(&mut c.shoot.d, args.d);
    let d = c.shoot.d;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Config(format!("d = {d} must be a positive number")));
    }
    let (r, meta) = setup(&c)?;
    let cfg = ShotConfig { keep_trajectory: true, ..r.shot };
    let shot = shoot(&r.params, &r.profile, d, &cfg)?;
    let dir = &c.output.dir;
    output::write_trajectory_csv(&dir.join("trajectory.csv"), &meta, &r.params, &r.profile, &shot)?;
    output::write_shots_csv(&dir.join("shots.csv"), &meta, &[&shot])?;
    let mut summary = Summary::new(meta, &c, &r.params, &r.profile);
    summary.shot = Some(ShotJson::new(&shot));
    output::write_json(&dir.join("shot.json"), &summary)?;
    match shot.outcome {
        Outcome::Crossing { r, t, y_at_zero } => println!("d = {d:e}: crossing at R = {r:.12e} (T = {t:.9}, y = {y_at_zero:.6e})"),
        Outcome::PositiveUpToBudget { t_end, x_end, trend } => {
            println!("d = {d:e}: positive up to t = {t_end:.3} (x = {x_end:.3e}, trend {trend:?})")
        }
        Outcome::Diverged { t } => {
            println!("d = {d:e}: diverged at t = {t:.6}");
            return Ok(EXIT_NUMERIC);
        }
    }
    Ok(EXIT_OK)
}

fn run_sweep(c: &RunConfig, r: &Resolved) -> Result<BifurcationDiagram> {
    let diagram = sweep_r(&r.params, &r.profile, &r.grid, &r.shot, threads(c))?;
    let failed = |p: &crate::sweep::DiagramPoint| !matches!(p.shot.as_ref().map(|s| s.outcome), Some(Outcome::Crossing { .. } | Outcome::PositiveUpToBudget { .. }));
    if diagram.points.iter().all(failed) {
        return Err(Error::Divergence("every shot of the sweep failed".into()));
    }
    Ok(diagram)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    let mut c = args.common.load()?;
    args.grid.apply(&mut c);
    let (r, meta) = setup(&c)?;
    r.grid.validate()?;
    let diagram = run_sweep(&c, &r)?;
    let fold = find_r0(&diagram);
    let dir = &c.output.dir;
    output::write_diagram_csv(&dir.join("diagram.csv"), &meta, &diagram)?;
    let title = format!("R(d), n = {}, p = {}, K = {}", r.params.n, r.params.p, r.profile);
    std::fs::write(dir.join("diagram.svg"), svg::diagram_svg(&diagram, fold, &title, &meta.regime))?;
    let summary = Summary::new(meta, &c, &r.params, &r.profile).with_diagram(&diagram, fold);
    output::write_json(&dir.join("summary.json"), &summary)?;

    let failed = summary.failed_points;
    println!("regime: {}", summary.meta.regime);
    println!("points: {} ({} failed)", diagram.points.len(), failed);
    if let Some(s) = diagram.tail.slope {
        println!("tail slope: {s:.6}");
    }
    match fold {
        Some(f) if !f.boundary => println!("R0 = {:.9e} at d0 = {:.9e}", f.r0, f.d0),
        Some(f) => println!("minimum R = {:.9e} at the grid end d = {:.3e}", f.r0, f.d0),
        None => println!("no crossing on the grid"),
    }
    Ok(EXIT_OK)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let mut c = args.common.load()?;
    args.grid.apply(&mut c);
    if args.radius.is_some() {
        c.solve.radius = args.radius;
    }
    if args.lambda.is_some() {
        c.solve.lambda = args.lambda;
    }
    let (r, meta) = setup(&c)?;
    r.grid.validate()?;
    let check_target = |v: f64, name: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("{name} = {v} must be positive")))
        }
    };
    match (c.solve.radius, c.solve.lambda) {
        (Some(v), None) => check_target(v, "R")?,
        (None, Some(v)) => check_target(v, "lambda")?,
        _ => return Err(Error::Config("give exactly one of R and lambda".into())),
    }
    let diagram = run_sweep(&c, &r)?;
    let fold = find_r0(&diagram);
    let (report, check) = match (c.solve.radius, c.solve.lambda) {
        (Some(radius), _) => (solve_radius(&diagram, radius)?, None),
        (_, Some(lambda)) => {
            let e = solve_eigenvalue(&diagram, lambda)?;
            (e.radius, e.check)
        }
        _ => unreachable!(),
    };
    let dir = &c.output.dir;
    output::write_diagram_csv(&dir.join("diagram.csv"), &meta, &diagram)?;
    let mut summary = Summary::new(meta, &c, &r.params, &r.profile).with_diagram(&diagram, fold);
    summary.roots = Some(report.clone());
    output::write_json(&dir.join("solve.json"), &summary)?;

    println!("target R = {:.12e}", report.target_radius);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for d in &report.roots {
        println!("root d = {d:.12e}");
    }
    if let Some(ch) = check {
        println!("rescaled check at d = {:.6e}: |w(1)|/d = {:.3e}", ch.d, ch.relative);
    }
    println!("count {}", report.roots.len());
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let mut c = args.common.load()?;
    set(&mut c.verify.epsilon, args.epsilon);
    set(&mut c.verify.tau_min, args.tau_min);
    set(&mut c.verify.tau_max, args.tau_max);
    set(&mut c.verify.launches, args.launches);
    set(&mut c.verify.seed, args.seed);
    let (r, meta) = setup(&c)?;
    let reports = run_suite(&r.params, &r.profile, &r.shot, &r.suite);

    println!("{:<22} {:<8} {:>12}  note", "check", "status", "slack");
    for rep in &reports {
        let status = match rep.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skipped => "skipped",
        };
        let slack = rep.slack.map(|s| format!("{s:.3e}")).unwrap_or_else(|| "-".into());
        println!("{:<22} {:<8} {:>12}  {}", rep.name, status, slack, rep.note);
    }
    let failed = reports.iter().any(|r| r.status == Status::Fail);
    let mut summary = Summary::new(meta, &c, &r.params, &r.profile);
    summary.diagnostics = reports;
    output::write_json(&c.output.dir.join("verify.json"), &summary)?;
    Ok(if failed { EXIT_VERIFY } else { EXIT_OK })
}
