// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. Every subcommand writes a JSON report carrying
//! `schema: 1` and returns exit code 0 (pass), 1 (suite failure or runtime
//! error) or 2 (usage error).

pub mod config;

use crate::adnverify::{run_pipeline_with, Transcription};
use crate::ellipticfem::{gen_mesh, EllipticSystem, Mesh, VectorFieldFE};
use crate::error::{MacrolabError, Result};
use crate::estimatelab::estimate::{G_CONSTANT_CAP, L2_RATIO_CAP, L6_RATIO_CAP};
use crate::estimatelab::{estimate_run, simulate, EstimateRun};
use crate::kinetics::suite::run_suite;
use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use serde::Serialize;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Report schema version.
pub const SCHEMA: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "macrolab", version, about = "Verification workbench for macroscopic kinetic estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact symbolic complementing-condition pipeline.
    VerifyAdn {
        #[command(flatten)]
        common: Common,
        /// Flip the k-th sign (0-based) of a transcribed entry, as `KEY:K`.
        #[arg(long, value_name = "KEY:K")]
        mutation: Option<String>,
        /// List the transcription keys with their sign counts and exit.
        #[arg(long)]
        list_keys: bool,
    },
    /// Velocity-space identity suite.
    CheckMoments {
        #[command(flatten)]
        common: Common,
    },
    /// Symmetric Poisson solve for a smooth compatible source.
    SolveSymPoisson {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Korn constant and Poincaré ratio of a mesh.
    KornConstant {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Transport simulation with a conservation trace.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// CSV path for the conservation trace (default: the `--out` path with extension `csv`).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Simulation followed by both estimate evaluations.
    EstimateReport {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Number of stored snapshots.
        #[arg(long)]
        snapshots: Option<usize>,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value configuration file (`key = value` per line, `#` comments).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    refine: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    s: Option<i32>,
    #[arg(long)]
    k: Option<i32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Debug, Default)]
struct MeshArgs {
    /// Mesh file in `msh3` format (overrides `--shape`/`--refine`).
    #[arg(long)]
    mesh: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct SimArgs {
    /// Number of steps (default: run to the horizon).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    /// `zero`, `microscopic_noise` or `periodic_microscopic`.
    #[arg(long)]
    forcing: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Fraction of the CFL bound used as time step.
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    cadence: Option<usize>,
    /// Disable the relaxation operator.
    #[arg(long)]
    no_collisions: bool,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<MacrolabError> for Failure {
    fn from(e: MacrolabError) -> Self {
        let code = if matches!(e, MacrolabError::Config(_)) { EXIT_USAGE } else { EXIT_FAIL };
        Failure { code, message: e.to_string() }
    }
}

/// Outcome of a subcommand: the JSON body and the names of failed checks.
struct Outcome {
    body: Value,
    failures: Vec<String>,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Caps the global thread pool at `MACROLAB_THREADS` when set.
fn configure_threads() {
    if let Some(n) = std::env::var("MACROLAB_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn dispatch(cmd: Command) -> std::result::Result<i32, Failure> {
    let (cfg, outcome, extra) = match cmd {
        Command::VerifyAdn { common, mutation, list_keys } => {
            let cfg = load(&common, None)?;
            if list_keys {
                let t = Transcription::new();
                for key in t.keys() {
                    say(&format!("{key} {}", t.sign_count(key)?));
                }
                return Ok(EXIT_PASS);
            }
            let o = verify_adn(&cfg, mutation.as_deref())?;
            (cfg, o, None)
        }
        Command::CheckMoments { common } => {
            let cfg = load(&common, None)?;
            let o = check_moments(&cfg)?;
            (cfg, o, None)
        }
        Command::SolveSymPoisson { common, mesh } => {
            let cfg = load(&common, None)?;
            let o = solve_sym_poisson(&cfg, mesh.mesh.as_deref())?;
            (cfg, o, None)
        }
        Command::KornConstant { common, mesh } => {
            let cfg = load(&common, None)?;
            let o = korn_constant(&cfg, mesh.mesh.as_deref())?;
            (cfg, o, None)
        }
        Command::Simulate { common, sim, trace } => {
            let cfg = load(&common, Some(&sim))?;
            let (outcome, csv) = simulate_cmd(&cfg)?;
            let path = trace.or_else(|| cfg.out.as_ref().map(|p| p.with_extension("csv")));
            (cfg, outcome, path.map(|p| (p, csv)))
        }
        Command::EstimateReport { common, sim, snapshots } => {
            let cfg = load(&common, Some(&sim))?;
            let o = estimate_report(&cfg, snapshots.unwrap_or(11))?;
            (cfg, o, None)
        }
    };
    let Outcome { body, failures } = outcome;
    let text = serde_json::to_string_pretty(&body).map_err(|e| Failure { code: EXIT_FAIL, message: e.to_string() })?;
    match &cfg.out {
        Some(p) => write(p, &(text + "\n"))?,
        None => say(&text),
    }
    if let Some((p, csv)) = extra {
        write(&p, &csv)?;
    }
    if failures.is_empty() {
        Ok(EXIT_PASS)
    } else {
        eprintln!("failed: {}", failures.join(", "));
        Ok(EXIT_FAIL)
    }
}

/// Prints a line to stdout, ignoring a closed pipe.
fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn write(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure { code: EXIT_FAIL, message: format!("{}: {e}", path.display()) })
}

/// Defaults, then the config file, then flags.
fn load(common: &Common, sim: Option<&SimArgs>) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure { code: EXIT_USAGE, message: format!("{}: {e}", path.display()) })?;
        cfg.apply_text(&text)?;
    }
    let mut set = |key: &str, v: Option<String>| -> Result<()> {
        match v {
            Some(v) => cfg.set(key, &v),
            None => Ok(()),
        }
    };
    set("out", common.out.as_ref().map(|p| p.display().to_string()))?;
    set("shape", common.shape.clone())?;
    set("refine", common.refine.map(|x| x.to_string()))?;
    set("grid", common.grid.map(|x| x.to_string()))?;
    set("eps", common.eps.map(|x| x.to_string()))?;
    set("s", common.s.map(|x| x.to_string()))?;
    set("k", common.k.map(|x| x.to_string()))?;
    set("seed", common.seed.map(|x| x.to_string()))?;
    set("preset", common.preset.clone())?;
    if let Some(sim) = sim {
        set("steps", sim.steps.map(|x| x.to_string()))?;
        set("horizon", sim.horizon.map(|x| x.to_string()))?;
        set("forcing", sim.forcing.clone())?;
        set("amplitude", sim.amplitude.map(|x| x.to_string()))?;
        set("cfl", sim.cfl.map(|x| x.to_string()))?;
        set("cadence", sim.cadence.map(|x| x.to_string()))?;
        if sim.no_collisions {
            set("collisions", Some("false".into()))?;
        }
    }
    Ok(cfg)
}

fn report(command: &str, cfg: &RunConfig, pass: bool, fields: Value) -> Value {
    let mut body = json!({
        "schema": SCHEMA,
        "command": command,
        "config": cfg,
        "pass": pass,
    });
    if let (Value::Object(b), Value::Object(f)) = (&mut body, fields) {
        b.extend(f);
    }
    body
}

fn to_value<T: Serialize>(t: &T) -> std::result::Result<Value, Failure> {
    serde_json::to_value(t).map_err(|e| Failure { code: EXIT_FAIL, message: e.to_string() })
}

fn verify_adn(cfg: &RunConfig, mutation: Option<&str>) -> std::result::Result<Outcome, Failure> {
    let base = Transcription::new();
    let t = match mutation {
        None => base,
        Some(m) => {
            let (key, k) = m
                .rsplit_once(':')
                .and_then(|(key, k)| k.parse::<usize>().ok().map(|k| (key, k)))
                .ok_or_else(|| Failure { code: EXIT_USAGE, message: format!("mutation `{m}` is not KEY:K") })?;
            base.flip_sign(key, k).map_err(|e| Failure { code: EXIT_USAGE, message: e.to_string() })?
        }
    };
    let r = run_pipeline_with(&t)?;
    let failures = r.failing_steps().into_iter().map(String::from).collect();
    let body = report(
        "verify-adn",
        cfg,
        r.pass,
        json!({
            "mutation": mutation,
            "final_determinant": r.final_determinant,
            "report": to_value(&r)?,
        }),
    );
    Ok(Outcome { body, failures })
}

fn check_moments(cfg: &RunConfig) -> std::result::Result<Outcome, Failure> {
    let suite = run_suite(cfg.grid.unwrap_or(16), cfg.seed)?;
    let table: serde_json::Map<String, Value> = suite
        .entries
        .iter()
        .map(|e| {
            Ok((
                e.label.clone(),
                json!({ "value": e.value, "defect": e.defect, "tol": e.tol, "bound": to_value(&e.bound)?, "pass": e.pass }),
            ))
        })
        .collect::<std::result::Result<_, Failure>>()?;
    let failures = suite.failing().into_iter().map(String::from).collect();
    let body = report("check-moments", cfg, suite.pass, json!({ "grid_points": suite.grid_points, "table": table }));
    Ok(Outcome { body, failures })
}

fn load_mesh(cfg: &RunConfig, path: Option<&Path>) -> std::result::Result<(Mesh, String), Failure> {
    match path {
        Some(p) => Ok((Mesh::read(p)?, p.display().to_string())),
        None => {
            let level = cfg.refine.unwrap_or(1);
            Ok((gen_mesh(cfg.shape()?, level)?, format!("{}@{level}", cfg.shape)))
        }
    }
}

/// Smooth source used by `solve-sym-poisson` before compatibility projection.
pub fn default_source(x: [f64; 3]) -> [f64; 3] {
    [x[1] * x[1] + x[2], (x[0] * x[2]).sin(), x[0] * x[0] - x[1]]
}

/// Relative tolerance for the energy identity and the interior residual.
pub const ELLIPTIC_TOL: f64 = 1e-8;

fn solve_sym_poisson(cfg: &RunConfig, path: Option<&Path>) -> std::result::Result<Outcome, Failure> {
    let (mesh, source) = load_mesh(cfg, path)?;
    let sys = EllipticSystem::new(mesh);
    let basis = sys.rigid_basis();
    let h = sys.compatibility_project(&VectorFieldFE::from_fn(&sys.mesh, default_source), &basis);
    let (u, cg) = sys.solve_sym_poisson(&h, &basis)?;
    let r = sys.residual_report(&u, &h);
    let energy_rel = (r.energy - r.work).abs() / r.work.abs().max(f64::MIN_POSITIVE);
    let mut failures = Vec::new();
    if !(energy_rel <= ELLIPTIC_TOL) {
        failures.push("energy_identity".to_string());
    }
    if !(r.interior_residual <= ELLIPTIC_TOL) {
        failures.push("interior_residual".to_string());
    }
    let body = report(
        "solve-sym-poisson",
        cfg,
        failures.is_empty(),
        json!({
            "mesh": { "source": source, "vertices": sys.mesh.vertices.len(), "tets": sys.mesh.tets.len(),
                      "boundary_faces": sys.mesh.boundary_faces.len() },
            "rigid_dim": basis.dim,
            "rigid_omegas": basis.omegas,
            "rigid_residuals": basis.residuals,
            "cg_iterations": cg.iterations,
            "residuals": to_value(&r)?,
            "energy_identity_relative": energy_rel,
            "u_l2": sys.asm.l2_inner(&u, &u).sqrt(),
            "u_h1": sys.asm.h1_sq(&u).sqrt(),
        }),
    );
    Ok(Outcome { body, failures })
}

fn korn_constant(cfg: &RunConfig, path: Option<&Path>) -> std::result::Result<Outcome, Failure> {
    let (mesh, source) = load_mesh(cfg, path)?;
    let sys = EllipticSystem::new(mesh);
    let basis = sys.rigid_basis();
    let korn = sys.korn_constant(&basis)?;
    let poincare = sys.poincare_ratio()?;
    let pass = korn > 0.0 && poincare.is_finite();
    let failures = if pass { Vec::new() } else { vec!["korn_constant".to_string()] };
    let body = report(
        "korn-constant",
        cfg,
        pass,
        json!({
            "mesh": { "source": source, "vertices": sys.mesh.vertices.len(), "tets": sys.mesh.tets.len() },
            "rigid_dim": basis.dim,
            "rigid_omegas": basis.omegas,
            "rigid_residuals": basis.residuals,
            "korn_constant": korn,
            "poincare_ratio": poincare,
        }),
    );
    Ok(Outcome { body, failures })
}

fn simulate_cmd(cfg: &RunConfig) -> std::result::Result<(Outcome, String), Failure> {
    let sc = cfg.sim_config()?;
    let res = simulate(&sc)?;
    let mass = res.trace.max_mass_step();
    let mut failures = Vec::new();
    if !(mass < cfg.mass_tol) {
        failures.push("mass_conservation".to_string());
    }
    if !(res.min_dissipation >= -1e-12) {
        failures.push("dissipation_nonnegative".to_string());
    }
    let steps = res.trace.entries.len() - 1;
    let body = report(
        "simulate",
        cfg,
        failures.is_empty(),
        json!({
            "steps": steps,
            "dt": res.dt,
            "cfl_bound": res.setup.cfl_bound(),
            "cells": res.setup.geom.cells(),
            "velocity_nodes": res.setup.grid.len(),
            "rigid_dim": res.setup.rigid.dim,
            "max_mass_step": mass,
            "max_energy_drift": res.trace.max_energy_drift(),
            "max_angular_drift": res.trace.max_angular_drift(),
            "min_dissipation": res.min_dissipation,
            "trace": to_value(&res.trace.entries)?,
        }),
    );
    Ok((Outcome { body, failures }, res.trace.to_csv()))
}

fn estimate_report(cfg: &RunConfig, snapshots: usize) -> std::result::Result<Outcome, Failure> {
    if snapshots < 2 {
        return Err(Failure { code: EXIT_USAGE, message: "at least two snapshots are needed".into() });
    }
    let sc = cfg.sim_config()?;
    let run: EstimateRun = estimate_run(&sc, snapshots)?;
    let mut failures = run.violations.clone();
    if !(run.max_mass_step < cfg.mass_tol) {
        failures.push("mass_conservation".to_string());
    }
    let body = report(
        "estimate-report",
        cfg,
        failures.is_empty(),
        json!({
            "caps": { "l2_ratio": cap(L2_RATIO_CAP), "l6_ratio": cap(L6_RATIO_CAP), "g_constant": cap(G_CONSTANT_CAP) },
            "nu": "sqrt(1 + |v|^2) for every collision model",
            "run": to_value(&run)?,
        }),
    );
    Ok(Outcome { body, failures })
}

/// Caps as JSON; an uncalibrated (infinite) cap is written as a string.
fn cap(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!("inf")
    }
}
