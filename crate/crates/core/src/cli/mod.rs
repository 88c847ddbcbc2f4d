//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 configuration, 3 runtime, 4 acceptance failure.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::acceptance;
use crate::characteristics::{compare_to_eulerian, integrate_characteristics};
use crate::error::Error;
use crate::profile::ProfileSpec;
use crate::reduced_pde::{Solver, SupStop};
use crate::scaling_laws::{self, LawMode};
use crate::scenarios::{build_initial, run_scenario, sweep, ScenarioKind, ScenarioSpec};

pub use config::{parse_config, parse_config_str, ParsedConfig};
pub use output::{emit_outputs, Artifacts, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_ACCEPT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "hydroblow", version, about = "Blow-up laboratory for the reduced hydrostatic Euler model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Scenario config file (flat key = value).
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Preset to use instead of a config file.
    #[arg(long, conflicts_with = "config")]
    pub kind: Option<String>,
    /// Output directory (overrides `outputs.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the blow-up profile as CSV.
    Profile {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        zmin: f64,
        #[arg(long)]
        zmax: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Log-spaced nodes (requires zmin > 0).
        #[arg(long)]
        log: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the reduced PDE and write snapshots and norms.
    Simulate(Source),
    /// Compare the Eulerian solver with the characteristics integrator.
    Oracle {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        particles: Option<usize>,
        /// Stop when sup|a| reaches this multiple of its initial value.
        #[arg(long, default_value_t = 10.0)]
        sup_factor: f64,
    },
    /// Run the solver and modulation analysis.
    Modulate(Source),
    /// Fit blow-up time and scale laws from a run directory.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0.25)]
        window_frac: f64,
    },
    /// Full pipeline with verdicts.
    Scenario(Source),
    /// κ × λ₀ sweep over `sweep.kappa` and `sweep.lambda0`.
    Sweep(Source),
    /// Run the acceptance suite.
    Accept {
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Config(Error),
    Runtime(Error),
    Acceptance(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_config_error(&e) {
            Failure::Config(e)
        } else {
            Failure::Runtime(e)
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    match e {
        Error::Parse { .. } | Error::Constraint { .. } => true,
        Error::Stage { stage, source } => *stage == "config" || is_config_error(source),
        _ => false,
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `args` and dispatches; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
        Err(Failure::Acceptance(n)) => {
            eprintln!("{n} acceptance criteria failed");
            EXIT_ACCEPT
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Profile { beta, zmin, zmax, points, log, out } => profile(beta, zmin, zmax, points, log, out),
        Command::Simulate(src) => simulate(&src),
        Command::Oracle { source, particles, sup_factor } => oracle(&source, particles, sup_factor),
        Command::Modulate(src) => full_run(&src, "modulate"),
        Command::Fit { input, beta, window_frac } => fit(&input, beta, window_frac),
        Command::Scenario(src) => full_run(&src, "scenario"),
        Command::Sweep(src) => run_sweep(&src),
        Command::Accept { only, json } => accept(&only, json),
    }
}

fn load(src: &Source) -> std::result::Result<ParsedConfig, Failure> {
    let parsed = match (&src.config, &src.kind) {
        (Some(p), _) => parse_config(p).map_err(Failure::Config)?,
        (None, Some(k)) => {
            let kind: ScenarioKind = k.parse().map_err(|m: String| Failure::Config(Error::constraint("kind", m)))?;
            parse_config_str(&format!("kind = {kind}\n"))?
        }
        (None, None) => parse_config_str("")?,
    };
    Ok(parsed)
}

fn out_dir(src: &Source, spec: &ScenarioSpec) -> PathBuf {
    match &src.out {
        Some(p) => p.clone(),
        None => output::resolve_dir(&spec.outputs_dir),
    }
}

fn command_line(name: &str, src: &Source) -> String {
    let mut s = format!("hydroblow {name}");
    if let Some(c) = &src.config {
        s += &format!(" --config {}", c.display());
    }
    if let Some(k) = &src.kind {
        s += &format!(" --kind {k}");
    }
    s
}

fn profile(beta: f64, zmin: f64, zmax: f64, points: usize, log: bool, out: Option<PathBuf>) -> Outcome {
    if points < 2 || !(zmax > zmin) || zmin < 0.0 || (log && zmin <= 0.0) {
        return Err(Failure::Config(Error::constraint(
            "0 ≤ zmin < zmax, points ≥ 2 (zmin > 0 with --log)",
            format!("zmin = {zmin}, zmax = {zmax}, points = {points}"),
        )));
    }
    let spec = ProfileSpec::new(beta)?;
    let zs: Vec<f64> = (0..points)
        .map(|i| {
            let f = i as f64 / (points - 1) as f64;
            if log {
                zmin * (zmax / zmin).powf(f)
            } else {
                zmin + (zmax - zmin) * f
            }
        })
        .collect();
    let pts = spec.point_batch(&zs)?;
    let mut csv = String::from("z,phi,phi_prime,psi,residual\n");
    for p in pts {
        csv += &format!("{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n", p.z, p.phi, p.phi_prime, p.psi, p.residual);
    }
    match out {
        Some(path) => std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?,
        None => std::io::stdout().write_all(csv.as_bytes()).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(())
}

fn simulate(src: &Source) -> Outcome {
    let start = Instant::now();
    let spec = load(src)?.spec;
    let profile = ProfileSpec::new(spec.beta)?;
    let grid = Arc::new(spec.grid.build()?);
    let init = build_initial(&spec, &profile, grid.clone())?;
    let traj = Solver::new(grid, spec.solver.clone())?.run(&init.field, spec.horizon)?;
    let dir = out_dir(src, &spec);
    let art = Artifacts { snapshots: &traj.snapshots, norms: &traj.norms, modulation: None, fits: None, verdicts: &[] };
    emit_outputs(art, &dir, &command_line("simulate", src), config::echo(&spec), start.elapsed().as_secs_f64())?;
    println!("{:?} at t = {:.6e}; outputs in {}", traj.termination, traj.last().time, dir.display());
    Ok(())
}

#[derive(Serialize)]
struct OracleOut {
    t: f64,
    sup: f64,
    max_abs_diff: f64,
    relative: f64,
    particles: usize,
}

fn oracle(src: &Source, particles: Option<usize>, sup_factor: f64) -> Outcome {
    let spec = load(src)?.spec;
    let profile = ProfileSpec::new(spec.beta)?;
    let grid = Arc::new(spec.grid.build()?);
    let init = build_initial(&spec, &profile, grid.clone())?;
    let cfg = crate::reduced_pde::SolverConfig { sup_stop: SupStop::Factor(sup_factor), ..spec.solver.clone() };
    let traj = Solver::new(grid.clone(), cfg.clone())?.run(&init.field, spec.horizon)?;
    let last = traj.last();
    let n = particles.unwrap_or(grid.len());
    let ps = integrate_characteristics(&init.field, n, last.time, &cfg)?;
    let c = compare_to_eulerian(&ps, last)?;
    let out = OracleOut { t: last.time, sup: c.sup, max_abs_diff: c.max_abs_diff, relative: c.relative(), particles: n };
    println!("{}", serde_json::to_string_pretty(&out).map_err(Error::from)?);
    Ok(())
}

fn full_run(src: &Source, name: &str) -> Outcome {
    let start = Instant::now();
    let spec = load(src)?.spec;
    let bundle = run_scenario(&spec)?;
    let dir = out_dir(src, &spec);
    let m = emit_outputs((&bundle).into(), &dir, &command_line(name, src), config::echo(&spec), start.elapsed().as_secs_f64())?;
    for v in &bundle.verdicts {
        println!("{} {} (measured {:.6e})", if v.pass { "PASS" } else { "FAIL" }, v.claim, v.measured);
    }
    println!("{}/{} verdicts passed; outputs in {}", m.verdicts.passed, m.verdicts.total, dir.display());
    Ok(())
}

#[derive(Serialize)]
struct FitOut {
    blowup: scaling_laws::BlowupFit,
    nu_law: Option<scaling_laws::ScaleLawFit>,
}

fn fit(input: &Path, beta: Option<f64>, window_frac: f64) -> Outcome {
    let norms = output::read_csv(&input.join(output::NORMS))?;
    let col = |m: &BTreeMap<String, Vec<f64>>, k: &str| {
        m.get(k).cloned().ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column `{k}`") })
    };
    let blowup = scaling_laws::fit_blowup_time(&col(&norms, "t")?, &col(&norms, "sup")?, window_frac)?;
    let mod_path = input.join(output::MODULATION);
    let nu_law = if mod_path.exists() {
        let m = output::read_csv(&mod_path)?;
        let mode = if beta.unwrap_or(0.0) > 0.0 { LawMode::Power } else { LawMode::Log };
        Some(scaling_laws::fit_nu_law_tail(&col(&m, "t")?, &col(&m, "nu")?, blowup.t_blowup, mode, 0.5)?)
    } else {
        None
    };
    let out = FitOut { blowup, nu_law };
    output::write_json(&input.join("refit.json"), &out)?;
    println!("{}", serde_json::to_string_pretty(&out).map_err(Error::from)?);
    Ok(())
}

fn run_sweep(src: &Source) -> Outcome {
    let start = Instant::now();
    let parsed = load(src)?;
    let base = parsed.spec;
    let lambdas = if parsed.sweep_lambda0.is_empty() { vec![base.lambda0] } else { parsed.sweep_lambda0 };
    let kappas = if parsed.sweep_kappa.is_empty() { vec![base.kappa] } else { parsed.sweep_kappa };
    let specs: Vec<ScenarioSpec> = lambdas
        .iter()
        .flat_map(|&l| kappas.iter().map(move |&k| (l, k)))
        .map(|(l, k)| ScenarioSpec { lambda0: l, kappa: k, ..base.clone() })
        .collect();
    for s in &specs {
        s.validate().map_err(Failure::Config)?;
    }
    let root = out_dir(src, &base);
    let results = sweep(&specs);
    let mut rows = Vec::new();
    for (s, r) in specs.iter().zip(results) {
        let name = format!("lambda0_{:e}_kappa_{:e}", s.lambda0, s.kappa);
        let row = match r {
            Ok(b) => {
                let m = emit_outputs((&b).into(), &root.join(&name), &command_line("sweep", src), config::echo(s), 0.0)?;
                SweepRow { dir: name, lambda0: s.lambda0, kappa: s.kappa, passed: m.verdicts.failed == 0, error: None }
            }
            Err(e) => SweepRow { dir: name, lambda0: s.lambda0, kappa: s.kappa, passed: false, error: Some(e.to_string()) },
        };
        println!("{} λ0={:e} κ={:e}", if row.passed { "PASS" } else { "FAIL" }, row.lambda0, row.kappa);
        rows.push(row);
    }
    let largest: BTreeMap<String, Option<f64>> = lambdas
        .iter()
        .map(|&l| {
            let k = rows.iter().filter(|r| r.lambda0 == l && r.passed).map(|r| r.kappa).fold(None, |m: Option<f64>, k| Some(m.map_or(k, |m| m.max(k))));
            (format!("{l:e}"), k)
        })
        .collect();
    let summary = SweepSummary { runs: rows, largest_passing_kappa: largest, wall_time_s: start.elapsed().as_secs_f64() };
    std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    output::write_json(&root.join("sweep.json"), &summary)?;
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    dir: String,
    lambda0: f64,
    kappa: f64,
    passed: bool,
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    runs: Vec<SweepRow>,
    largest_passing_kappa: BTreeMap<String, Option<f64>>,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct AcceptRow<'a> {
    id: u8,
    title: &'a str,
    pass: bool,
    checks: Vec<(&'a str, bool, f64, &'a str)>,
    notes: &'a [String],
}

fn accept(only: &[u8], json: Option<PathBuf>) -> Outcome {
    if let Some(&bad) = only.iter().find(|&&i| !(1..=13).contains(&i)) {
        return Err(Failure::Config(Error::constraint("criterion id in 1..=13", format!("got {bad}"))));
    }
    let reports = acceptance::run(only);
    for r in &reports {
        print!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.pass()).count();
    println!("{}/{} criteria passed", reports.len() - failed, reports.len());
    if let Some(path) = json {
        let rows: Vec<AcceptRow> = reports
            .iter()
            .map(|r| AcceptRow {
                id: r.id,
                title: r.title,
                pass: r.pass(),
                checks: r.checks.iter().map(|c| (c.name.as_str(), c.pass, c.measured, c.bound.as_str())).collect(),
                notes: &r.notes,
            })
            .collect();
        output::write_json(&path, &rows)?;
    }
    if failed > 0 {
        Err(Failure::Acceptance(failed))
    } else {
        Ok(())
    }
}
