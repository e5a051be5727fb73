//! The `solve`, `verify` and `convergence` commands.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad configuration or data
//! that miss a check's hypothesis, 3 solver or I/O failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{write_matrix, Operators};
use crate::config::{Problem, RunConfig};
use crate::data::{Preset, ProblemData};
use crate::error::{Error, Result};
use crate::solver::{
    solve_auxiliary_robin_with, solve_dirichlet_with, solve_robin_with, TimeGrid, Trajectory,
};
use crate::verify::{self, CheckReport, TOL_ENERGY, TOL_EXACT};

/// Overrides `output_dir` from the config when set.
pub const OUTPUT_DIR_ENV: &str = "FRACDIFF_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "fracdiff",
    version,
    about = "Fractional diffusion with Dirichlet or nonlocal Robin exterior conditions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve and write the trajectory CSV and a manifest.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Also write the assembled matrices.
        #[arg(long)]
        dump_matrices: bool,
    },
    /// Run the configured checks and write a report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dump_matrices: bool,
    },
    /// Self-convergence under simultaneous mesh and step halving.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        levels: usize,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::InvalidParameter { .. }
        | Error::HypothesisViolation(_)
        | Error::MissingData(_)
        | Error::PointInsideDomain { .. }
        | Error::DimensionMismatch { .. } => 2,
        Error::NonConvergence { .. }
        | Error::NonFinite { .. }
        | Error::SolverBreakdown { .. }
        | Error::Io(_) => 3,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Solve {
            config,
            dump_matrices,
        } => {
            let cfg = RunConfig::from_path(config)?;
            let out = prepare_output(&cfg, "solve")?;
            let traj = run_solve(&cfg, &out, *dump_matrices)?;
            println!(
                "wrote {} steps to {}",
                traj.grid.n_steps(),
                out.join("trajectory.csv").display()
            );
            Ok(0)
        }
        Command::Verify {
            config,
            dump_matrices,
        } => {
            let cfg = RunConfig::from_path(config)?;
            let out = prepare_output(&cfg, "verify")?;
            let reports = run_verify(&cfg, &out, *dump_matrices)?;
            for r in &reports {
                println!("{}", r.line());
            }
            Ok(if reports.iter().all(|r| r.passed) {
                0
            } else {
                1
            })
        }
        Command::Convergence { config, levels } => {
            let cfg = RunConfig::from_path(config)?;
            if *levels < 2 {
                return Err(Error::Config {
                    line: None,
                    field: "levels".into(),
                    reason: format!("need at least 2 levels, got {levels}"),
                });
            }
            let out = prepare_output(&cfg, "convergence")?;
            for row in run_convergence(&cfg, *levels, &out)? {
                println!("{}", row.csv());
            }
            Ok(0)
        }
    }
}

/// `$FRACDIFF_OUTPUT_DIR` if set, otherwise the config's `output_dir`.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => cfg.output_dir.clone(),
    }
}

/// Creates the output directory and writes `manifest.toml` into it.
pub fn prepare_output(cfg: &RunConfig, command: &str) -> Result<PathBuf> {
    let out = output_dir(cfg);
    std::fs::create_dir_all(&out)?;
    write_manifest(cfg, &out, command)?;
    Ok(out)
}

/// The config as parsed (with the resolved output directory) plus derived
/// quantities as comments. Feeding it back to `--config` repeats the run.
pub fn write_manifest(cfg: &RunConfig, out: &Path, command: &str) -> Result<()> {
    let mut resolved = cfg.clone();
    resolved.output_dir = out.to_path_buf();
    let mesh = cfg.mesh()?;
    let params = cfg.params()?;
    let grid = cfg.grid()?;
    let header = format!(
        "# fracdiff {} {command}\n# h = {:?}\n# collar_h = {:?}\n# nodes = {}\n# n_steps = {}\n# c_ns = {:?}\n\n",
        env!("CARGO_PKG_VERSION"),
        mesh.h(),
        mesh.collar_h(),
        mesh.n_nodes(),
        grid.n_steps(),
        params.c_ns()
    );
    std::fs::write(out.join("manifest.toml"), header + &resolved.to_toml())?;
    Ok(())
}

pub fn assemble(cfg: &RunConfig, refine: usize) -> Result<Operators> {
    Operators::assemble(
        &cfg.mesh_refined(refine)?,
        &cfg.params()?,
        cfg.problem.variant(),
    )
}

fn dump(ops: &Operators, out: &Path) -> Result<()> {
    write_matrix(&out.join("stiffness.txt"), &ops.stiffness)?;
    write_matrix(&out.join("mass_omega.txt"), &ops.mass_omega)?;
    if let Some(flux) = &ops.flux {
        write_matrix(&out.join("mass_collar.txt"), &ops.mass_collar)?;
        write_matrix(&out.join("flux.txt"), flux)?;
    }
    Ok(())
}

pub fn solve(
    problem: Problem,
    ops: &Operators,
    data: &ProblemData,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    match problem {
        Problem::Dirichlet => solve_dirichlet_with(ops, data, grid),
        Problem::Robin => solve_robin_with(ops, data, grid),
        Problem::Auxiliary => solve_auxiliary_robin_with(ops, data, grid),
    }
}

/// Writes `trajectory.csv` (and `auxiliary.csv` for Robin runs).
pub fn run_solve(cfg: &RunConfig, out: &Path, dump_matrices: bool) -> Result<Trajectory> {
    let ops = assemble(cfg, 1)?;
    if dump_matrices {
        dump(&ops, out)?;
    }
    let traj = solve(cfg.problem, &ops, &cfg.problem_data()?, &cfg.grid()?)?;
    traj.write_csv(&ops.mesh, &out.join("trajectory.csv"))?;
    if let Some(aux) = &traj.auxiliary {
        aux.write_csv(&ops.mesh, &out.join("auxiliary.csv"))?;
    }
    Ok(traj)
}

/// Data of the configured problem type built from presets.
fn data_from(problem: Problem, f: Preset, g: Preset, rho0: Preset) -> ProblemData {
    match problem {
        Problem::Dirichlet => ProblemData::dirichlet(f.space_time(), rho0.point_field()),
        _ => ProblemData::robin(f.space_time(), g.space_time(), rho0.point_field()),
    }
}

/// Data sets for the randomized sweeps, one generator per check so that the
/// outcome of one check does not depend on which others run.
struct Sampler {
    rng: ChaCha8Rng,
    span: (f64, f64),
    problem: Problem,
}

impl Sampler {
    fn new(cfg: &RunConfig, salt: u64) -> Self {
        let d = &cfg.domain;
        let r = d.truncation_radius;
        Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            span: (d.omega[0] - r, d.omega[1] + r),
            problem: cfg.problem,
        }
    }

    fn nonnegative(&mut self) -> Preset {
        Preset::random_nonnegative(&mut self.rng, self.span)
    }

    fn signed(&mut self) -> Preset {
        Preset::random_signed(&mut self.rng, self.span)
    }

    fn nonnegative_data(&mut self) -> (Preset, Preset, Preset) {
        (self.nonnegative(), self.nonnegative(), self.nonnegative())
    }

    fn signed_data(&mut self) -> (Preset, Preset, Preset) {
        (self.signed(), self.signed(), self.signed())
    }

    fn build(&self, (f, g, r): (Preset, Preset, Preset)) -> ProblemData {
        data_from(self.problem, f, g, r)
    }
}

/// The worst of several reports under one name, with the run count noted.
fn aggregate(name: &str, reports: Vec<CheckReport>, note: &str) -> Result<CheckReport> {
    let n = reports.len();
    let worst = reports
        .into_iter()
        .max_by(|a, b| a.worst_violation.total_cmp(&b.worst_violation))
        .ok_or_else(|| Error::MissingData(format!("no runs for {name}")))?;
    Ok(CheckReport::new(
        name,
        worst.worst_violation,
        worst.tolerance,
        worst.location,
        format!("runs={n} {note} worst: {}", worst.context),
    ))
}

fn preset_of(spec: &crate::config::PresetSpec, path: &str) -> Result<Preset> {
    spec.to_preset(path)
        .map_err(|(field, reason)| Error::Config {
            line: None,
            field,
            reason,
        })
}

fn config_presets(cfg: &RunConfig) -> Result<(Preset, Preset, Preset)> {
    let d = &cfg.data;
    let g = match &d.exterior {
        Some(spec) => preset_of(spec, "data.exterior")?,
        None => Preset::Zero,
    };
    Ok((
        preset_of(&d.source, "data.source")?,
        g,
        preset_of(&d.initial, "data.initial")?,
    ))
}

/// Operators and grids at the configured resolution and at `(h/2, dt/2)`.
struct Levels {
    ops: Vec<Operators>,
    grids: Vec<TimeGrid>,
}

impl Levels {
    fn new(cfg: &RunConfig, base: &Operators) -> Result<Self> {
        let grid = cfg.grid()?;
        Ok(Self {
            ops: vec![base.clone(), assemble(cfg, 2)?],
            grids: vec![grid, grid.refined()],
        })
    }
}

/// Runs every configured check, writes `report.txt` and returns the reports.
pub fn run_verify(cfg: &RunConfig, out: &Path, dump_matrices: bool) -> Result<Vec<CheckReport>> {
    if cfg.checks.is_empty() {
        return Err(Error::Config {
            line: None,
            field: "checks".into(),
            reason: "verify needs at least one check".into(),
        });
    }
    let ops = assemble(cfg, 1)?;
    if dump_matrices {
        dump(&ops, out)?;
    }
    let grid = cfg.grid()?;
    let base = cfg.problem_data()?;
    let kind = cfg.problem.kind();
    let mut levels: Option<Levels> = None;
    let mut reports = Vec::new();
    for (salt, name) in cfg.checks.iter().enumerate() {
        let mut sampler = Sampler::new(cfg, salt as u64 + 1);
        match name.as_str() {
            "positive-part" => {
                let n = ops.n_unknowns();
                let count = 50 * cfg.samples;
                let mut worst = Vec::with_capacity(count);
                for _ in 0..count {
                    let phi: Vec<f64> = (0..n).map(|_| sampler.rng.gen_range(-1.0..1.0)).collect();
                    worst.push(verify::check_positive_part(&phi, &ops.stiffness, 1e-10)?);
                }
                reports.push(aggregate("positive-part", worst, "")?);
                reports.push(verify::offdiagonal_sign_report(&ops.stiffness, "stiffness"));
            }
            "offdiag-sign" => {
                reports.push(verify::offdiagonal_sign_report(&ops.stiffness, "stiffness"))
            }
            "positivity" | "comparison" => {
                if levels.is_none() {
                    levels = Some(Levels::new(cfg, &ops)?);
                }
                let lv = levels.as_ref().expect("levels were just built");
                let pairs = if name == "positivity" {
                    let mut sets = vec![config_presets(cfg)?];
                    sets.extend((0..cfg.samples).map(|_| sampler.nonnegative_data()));
                    sets.into_iter()
                        .map(|s| (None, sampler.build(s)))
                        .collect::<Vec<_>>()
                } else if let Some(hi) = cfg.compare_data()? {
                    vec![(Some(base.clone()), hi)]
                } else {
                    let (f, g, r) = config_presets(cfg)?;
                    (0..cfg.samples)
                        .map(|_| {
                            let (df, dg, dr) = sampler.signed_data();
                            let lo = (f.plus(&df), g.plus(&dg), r.plus(&dr));
                            let (uf, ug, ur) = sampler.nonnegative_data();
                            let hi = (lo.0.plus(&uf), lo.1.plus(&ug), lo.2.plus(&ur));
                            (Some(sampler.build(lo)), sampler.build(hi))
                        })
                        .collect()
                };
                let mut found = Vec::new();
                for (o, g) in lv.ops.iter().zip(&lv.grids) {
                    for (lo, hi) in &pairs {
                        let th = solve(cfg.problem, o, hi, g)?;
                        found.push(match lo {
                            None => verify::check_positivity(o, hi, &th, TOL_EXACT)?,
                            Some(lo) => {
                                let tl = solve(cfg.problem, o, lo, g)?;
                                verify::check_comparison(o, lo, &tl, hi, &th, TOL_EXACT)?
                            }
                        });
                    }
                }
                let label = format!("{name}-{}", kind.name());
                reports.push(aggregate(&label, found, "levels=2")?);
            }
            "linf" => {
                let mut sets = vec![config_presets(cfg)?];
                for _ in 0..cfg.samples {
                    let (f, g, r) = sampler.signed_data();
                    let f = match cfg.problem {
                        // The Dirichlet bound is only claimed for f ≤ 0.
                        Problem::Dirichlet => sampler.nonnegative().negated(),
                        _ => f,
                    };
                    sets.push((f, g, r));
                }
                let mut found = Vec::new();
                for s in sets {
                    let data = sampler.build(s);
                    let t = solve(cfg.problem, &ops, &data, &grid)?;
                    found.push(match cfg.problem {
                        Problem::Dirichlet => {
                            verify::check_linf_dirichlet(&ops, &data, &t, TOL_EXACT)?
                        }
                        _ => verify::check_linf_robin(&ops, &data, &t, TOL_EXACT)?,
                    });
                }
                let label = if cfg.problem == Problem::Dirichlet {
                    "linf-dirichlet"
                } else {
                    found
                        .first()
                        .map(|r| r.name.as_str())
                        .unwrap_or("linf-robin")
                }
                .to_string();
                reports.push(aggregate(&label, found, "")?);
            }
            "linf-abs" => {
                if cfg.problem != Problem::Dirichlet {
                    return Err(Error::Config {
                        line: None,
                        field: "checks".into(),
                        reason: "linf-abs applies to the Dirichlet problem only".into(),
                    });
                }
                let t = solve(cfg.problem, &ops, &base, &grid)?;
                reports.push(verify::check_linf_dirichlet_abs(
                    &ops, &base, &t, TOL_EXACT,
                )?);
            }
            "energy" => {
                let mut sets = vec![config_presets(cfg)?];
                sets.extend((0..cfg.samples).map(|_| sampler.signed_data()));
                let mut found = Vec::new();
                for s in sets {
                    let data = sampler.build(s);
                    let t = solve(cfg.problem, &ops, &data, &grid)?;
                    found.push(verify::check_energy(&ops, &data, &t, TOL_ENERGY)?);
                }
                let label = found[0].name.clone();
                reports.push(aggregate(&label, found, "")?);
            }
            "transform-equivalence" => {
                if cfg.problem == Problem::Dirichlet {
                    return Err(Error::Config {
                        line: None,
                        field: "checks".into(),
                        reason: "transform-equivalence needs a Robin problem".into(),
                    });
                }
                let grids = [grid, grid.refined(), grid.refined().refined()];
                reports.push(verify::check_transform_equivalence(
                    &ops, &base, &grids, 0.2,
                )?);
            }
            "uniqueness" => reports.push(verify::check_uniqueness(&ops, kind, &grid, &base)?),
            other => {
                return Err(Error::Config {
                    line: None,
                    field: "checks".into(),
                    reason: format!("unknown check `{other}`"),
                })
            }
        }
    }
    verify::write_reports(&out.join("report.txt"), &reports)?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    /// Finer of the two levels compared.
    pub level: usize,
    pub n_interior: usize,
    pub dt: f64,
    /// Max nodal difference to the previous level on the coarse nodes and
    /// steps.
    pub difference: f64,
    /// `log2` of the previous difference over this one.
    pub observed_order: Option<f64>,
}

impl ConvergenceRow {
    pub fn csv(&self) -> String {
        let order = self
            .observed_order
            .map(|o| format!("{o:.6}"))
            .unwrap_or_default();
        format!(
            "{},{},{:e},{:e},{}",
            self.level, self.n_interior, self.dt, self.difference, order
        )
    }
}

/// Solves at `(h, dt) / 2^l` for `l < levels` and writes `convergence.csv`.
pub fn run_convergence(cfg: &RunConfig, levels: usize, out: &Path) -> Result<Vec<ConvergenceRow>> {
    if levels < 2 {
        return Err(Error::param(
            "levels",
            format!("need at least 2, got {levels}"),
        ));
    }
    let data = cfg.problem_data()?;
    let mut grid = cfg.grid()?;
    let coarse = cfg.grid()?.n_steps();
    let n_nodes = cfg.mesh()?.n_nodes();
    let mut prev: Option<Vec<Vec<f64>>> = None;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for l in 0..levels {
        let factor = 1usize << l;
        let ops = assemble(cfg, factor)?;
        let traj = solve(cfg.problem, &ops, &data, &grid)?;
        let sampled: Vec<Vec<f64>> = (0..=coarse)
            .map(|k| {
                let f = &traj.fields[k * factor];
                (0..n_nodes).map(|j| f.values[j * factor]).collect()
            })
            .collect();
        if let Some(p) = &prev {
            let difference = p
                .iter()
                .flatten()
                .zip(sampled.iter().flatten())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let observed_order = rows.last().map(|r| (r.difference / difference).log2());
            rows.push(ConvergenceRow {
                level: l,
                n_interior: cfg.domain.n_interior * factor,
                dt: grid.dt(),
                difference,
                observed_order,
            });
        }
        prev = Some(sampled);
        grid = grid.refined();
    }
    let mut text = String::from("level,n_interior,dt,difference,observed_order\n");
    for r in &rows {
        text.push_str(&r.csv());
        text.push('\n');
    }
    std::fs::write(out.join("convergence.csv"), text)?;
    Ok(rows)
}
