//! `willmore`: energies, sweeps, verification suites, flows and homotopy
//! traces from the command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for
//! invalid input or usage.

mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use willmore_core::catsph::verify::{sweep, sweep_csv};
use willmore_core::catsph::{build_catsph_with, CatSphParams, Kind};
use willmore_core::corpus;
use willmore_core::flow::{flow_run, FlowControls, FlowState, Termination};
use willmore_core::gluing::GluingProfile;
use willmore_core::homotopy::{assemble_model, shrinking_trace, turning_bound_report, AttachmentConfig};
use willmore_core::profile::io::{load, write_atomic, write_csv, write_json};
use willmore_core::profile::ProfileCurve;
use willmore_core::segments::SampleSpec;
use willmore_core::svg;

use config::{check_grid, check_tol, parse_grid, Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "willmore", version, about = "Willmore energy computations for surfaces of revolution")]
struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true, env = "WILLMORE_CONFIG")]
    config: Option<PathBuf>,
    /// Tolerance override (meaning depends on the command).
    #[arg(long, global = true, env = "WILLMORE_TOL")]
    tol: Option<f64>,
    /// Samples per generated profile.
    #[arg(long, global = true, env = "WILLMORE_GRID")]
    grid: Option<usize>,
    /// Seed for random corpora.
    #[arg(long, global = true, env = "WILLMORE_SEED")]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true, env = "WILLMORE_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, env = "WILLMORE_FORMAT")]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Willmore energy of a profile curve file (CSV `s,r,h` or JSON).
    Energy { file: PathBuf },
    /// Catenoid-sphere energies over a λ × δ grid on the family R = λ.
    Sweep {
        #[arg(long, value_parser = parse_kind)]
        kind: Option<Kind>,
        /// λ values: `start:end:step` ranges or comma lists.
        #[arg(long)]
        lambdas: Option<String>,
        #[arg(long)]
        deltas: Option<String>,
    },
    /// Run a verification suite and print its JSON report.
    Verify {
        suite: Suite,
        /// Profile for the turning suite; defaults to the bundled J model.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Also render the turning decomposition as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Discrete Willmore flow from an initial profile.
    Flow {
        init: PathBuf,
        #[arg(long)]
        steps: Option<usize>,
        /// Write a state checkpoint every this many accepted steps (0: never).
        #[arg(long, default_value_t = 100)]
        checkpoint_every: usize,
        #[arg(long)]
        dt0: Option<f64>,
        #[arg(long)]
        r_floor: Option<f64>,
        /// Energy the convergence test compares against.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Energy along the shrinking homotopy of a type-β catenoid sphere.
    Homotopy {
        #[arg(long)]
        lambda_start: Option<f64>,
        #[arg(long)]
        lambda_end: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// λ values to draw; defaults to start, midpoint and end.
        #[arg(long)]
        frames: Option<String>,
    },
    /// Write the bundled profile corpus.
    Corpus,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Gluing,
    Catsph,
    GlueScaling,
    Table,
    Liyau,
    Turning,
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    s.parse::<Kind>().map_err(|e| e.to_string())
}

/// Flags over config file over defaults.
struct Settings {
    tol: Option<f64>,
    grid: usize,
    seed: u64,
    /// Seed given by flag, environment or config file.
    seed_set: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    cfg: RunConfig,
}

impl Settings {
    fn resolve(cli: &Cli) -> anyhow::Result<Settings> {
        let cfg = RunConfig::load(cli.config.as_deref())?;
        let tol = cli.tol.or(cfg.tol).map(check_tol).transpose()?;
        let grid = check_grid(cli.grid.or(cfg.grid).unwrap_or(corpus::SAMPLES))?;
        Ok(Settings {
            tol,
            grid,
            seed: cli.seed.or(cfg.seed).unwrap_or(corpus::DEFAULT_SEED),
            seed_set: cli.seed.or(cfg.seed),
            out: cli.out.clone().or_else(|| cfg.out.clone()),
            format: cli.format.or(cfg.format),
            cfg,
        })
    }

    fn out_dir(&self, default: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(default))
    }
}

enum Outcome {
    Pass,
    Fail,
}

/// Input and usage problems, reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = Settings::resolve(&cli).and_then(|s| run(&cli.cmd, &s));
    match res {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            if e.downcast_ref::<Usage>().is_some() {
                eprintln!("usage error: {e:#}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}

fn run(cmd: &Cmd, s: &Settings) -> anyhow::Result<Outcome> {
    match cmd {
        Cmd::Energy { file } => cmd_energy(file, s),
        Cmd::Sweep { kind, lambdas, deltas } => cmd_sweep(*kind, lambdas.as_deref(), deltas.as_deref(), s),
        Cmd::Verify { suite, curve, svg } => cmd_verify(*suite, curve.as_deref(), svg.as_deref(), s),
        Cmd::Flow { init, steps, checkpoint_every, dt0, r_floor, target } => {
            let mut ctrl = s.cfg.flow.clone().unwrap_or_default();
            if let Some(n) = steps {
                ctrl.max_steps = *n;
            }
            if dt0.is_some() {
                ctrl.dt0 = *dt0;
            }
            if r_floor.is_some() {
                ctrl.r_floor = *r_floor;
            }
            if let Some(t) = target {
                ctrl.target = *t;
            }
            if let Some(t) = s.tol {
                ctrl.energy_tol = t;
            }
            cmd_flow(init, &ctrl, *checkpoint_every, s)
        }
        Cmd::Homotopy { lambda_start, lambda_end, delta, steps, frames } => {
            let h = &s.cfg.homotopy;
            let start = lambda_start.or(h.lambda_start).unwrap_or(8.0);
            let end = lambda_end.or(h.lambda_end).unwrap_or(2.0);
            let frames = match frames {
                Some(f) => Some(parse_grid(f).map_err(Usage)?),
                None => h.frames.clone(),
            };
            let delta = delta.or(h.delta).unwrap_or(0.05);
            cmd_homotopy(start, end, delta, steps.or(h.steps).unwrap_or(60), frames, s)
        }
        Cmd::Corpus => cmd_corpus(s),
    }
}

/// Write to `--out` atomically, or to stdout.
fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn load_curve(path: &Path) -> anyhow::Result<ProfileCurve> {
    load(path).map_err(|e| anyhow!(Usage(format!("{}: {e}", path.display()))))
}

#[derive(Serialize)]
struct EnergyOut {
    #[serde(rename = "W")]
    w: f64,
    error: f64,
    /// `W / 4π`.
    spheres: f64,
    samples: usize,
    closed_on_axis: (bool, bool),
    pieces: Vec<willmore_core::numerics::quad::Integral>,
}

fn cmd_energy(file: &Path, s: &Settings) -> anyhow::Result<Outcome> {
    let curve = load_curve(file)?;
    let e = curve.willmore_energy().map_err(|e| anyhow!(Usage(format!("{}: {e}", file.display()))))?;
    let w = e.total.value;
    if let Some(tol) = s.tol {
        if e.total.error > tol * w.abs().max(1.0) {
            bail!(Usage(format!(
                "quadrature error estimate {:.3e} exceeds tolerance {tol:.3e}; refine the curve",
                e.total.error
            )));
        }
    }
    let out = EnergyOut {
        w,
        error: e.total.error,
        spheres: w / (4.0 * std::f64::consts::PI),
        samples: curve.len(),
        closed_on_axis: curve.closed_on_axis,
        pieces: e.pieces,
    };
    let bytes = match s.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let mut t = String::from("quantity,value,error\n");
            t.push_str(&format!("W,{:?},{:?}\n", out.w, out.error));
            for (k, p) in out.pieces.iter().enumerate() {
                t.push_str(&format!("piece_{k},{:?},{:?}\n", p.value, p.error));
            }
            t.into_bytes()
        }
    };
    emit(s.out.as_deref(), &bytes)?;
    Ok(Outcome::Pass)
}

fn cmd_sweep(kind: Option<Kind>, lambdas: Option<&str>, deltas: Option<&str>, s: &Settings) -> anyhow::Result<Outcome> {
    let c = &s.cfg.sweep;
    let kind = match (kind, &c.kind) {
        (Some(k), _) => k,
        (None, Some(k)) => k.parse::<Kind>().map_err(|e| anyhow!(Usage(e.to_string())))?,
        (None, None) => Kind::Beta,
    };
    let grid = |flag: Option<&str>, conf: &Option<Vec<f64>>, default: &str| -> anyhow::Result<Vec<f64>> {
        match (flag, conf) {
            (Some(f), _) => parse_grid(f).map_err(|e| anyhow!(Usage(e))),
            (None, Some(v)) => Ok(v.clone()),
            (None, None) => Ok(parse_grid(default).expect("default grid parses")),
        }
    };
    let lambdas = grid(lambdas, &c.lambdas, "20:200:10")?;
    let deltas = grid(deltas, &c.deltas, "0.1")?;
    let rows = sweep(kind, &lambdas, &deltas);
    let bytes = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows)?.into_bytes(),
        Format::Json => to_json(&rows)?,
    };
    emit(s.out.as_deref(), &bytes)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        eprintln!("{failed} of {} sweep cells failed; see the status column", rows.len());
        return Ok(Outcome::Fail);
    }
    Ok(Outcome::Pass)
}

fn bundled_j() -> anyhow::Result<ProfileCurve> {
    let cfg = AttachmentConfig::symmetric((Kind::Alpha, Kind::Alpha), 20.0, 0.1)?;
    Ok(assemble_model(&cfg, &GluingProfile::new(0.1)?)?)
}

fn cmd_verify(suite: Suite, curve: Option<&Path>, svg_out: Option<&Path>, s: &Settings) -> anyhow::Result<Outcome> {
    let (passed, report) = match suite {
        Suite::Gluing => {
            let mut cfg = s.cfg.gluing.clone().unwrap_or_default();
            if let Some(seed) = s.seed_set {
                cfg.seed = seed;
            }
            if let Some(t) = s.tol {
                cfg.slope_tol = t;
            }
            let r = willmore_core::gluing::verify_gluing_bound(&cfg)?;
            (r.passed, to_json(&r)?)
        }
        Suite::Catsph => {
            let mut cfg = s.cfg.catsph.clone().unwrap_or_default();
            if let Some(t) = s.tol {
                cfg.limit_tol = t;
            }
            let r = willmore_core::catsph::verify_shrinking(&cfg)?;
            (r.passed, to_json(&r)?)
        }
        Suite::GlueScaling => {
            let r = willmore_core::catsph::verify_glue_scaling(&s.cfg.glue_scaling.clone().unwrap_or_default())?;
            (r.passed, to_json(&r)?)
        }
        Suite::Table => {
            let r = willmore_core::catsph::table::verify_table(&[2.0, 6.0, 50.0], 100, 0.1, s.tol.unwrap_or(1e-6))?;
            (r.passed, to_json(&r)?)
        }
        Suite::Liyau => {
            let r = corpus::liyau_suite(s.seed)?;
            (r.passed, to_json(&r)?)
        }
        Suite::Turning => {
            let c = match curve {
                Some(p) => load_curve(p)?,
                None => bundled_j()?,
            };
            let r = turning_bound_report(&c).map_err(|e| anyhow!(Usage(e.to_string())))?;
            if let Some(p) = svg_out {
                let title = format!("τ = {}, W = {:.5}, bound {:.5}", r.tau, r.energy, r.bound);
                write_atomic(p, svg::segments_svg(&c, &r, &title).as_bytes())?;
            }
            (r.passed, to_json(&r)?)
        }
    };
    emit(s.out.as_deref(), &report)?;
    let name = suite.to_possible_value().expect("suite names").get_name().to_string();
    eprintln!("{name}: {}", if passed { "PASS" } else { "FAIL" });
    Ok(if passed { Outcome::Pass } else { Outcome::Fail })
}

#[derive(Serialize)]
struct FlowSummary<'a> {
    termination: Termination,
    steps: usize,
    time: f64,
    initial_energy: f64,
    final_energy: f64,
    initial_tau: f64,
    final_tau: f64,
    tau_changes: usize,
    max_step_increase: f64,
    remeshes: usize,
    remesh_jump: f64,
    step_failure: Option<&'a str>,
    controls: &'a FlowControls,
    diagnostic: &'a willmore_core::flow::NeckDiagnostic,
}

fn cmd_flow(init: &Path, ctrl: &FlowControls, every: usize, s: &Settings) -> anyhow::Result<Outcome> {
    let curve = load_curve(init)?;
    let dir = s.out_dir("flow-out");
    let ckdir = dir.join("checkpoints");
    let mut ck_err: Option<anyhow::Error> = None;
    let observer = |_: &FlowState, after: &FlowState| {
        if every == 0 || after.step % every != 0 || ck_err.is_some() {
            return;
        }
        let path = ckdir.join(format!("step_{:07}.json", after.step));
        if let Err(e) = to_json(after).and_then(|b| Ok(write_atomic(&path, &b)?)) {
            ck_err = Some(e);
        }
    };
    let traj = flow_run(curve, ctrl, observer).map_err(|e| match e {
        willmore_core::Error::Io(_) => anyhow!(e),
        other => anyhow!(Usage(other.to_string())),
    })?;
    if let Some(e) = ck_err {
        return Err(e.context("writing checkpoint"));
    }
    write_atomic(&dir.join("trajectory.csv"), traj.to_csv()?.as_bytes())?;
    let fs = &traj.final_state;
    let summary = FlowSummary {
        termination: traj.termination,
        steps: fs.step,
        time: fs.time,
        initial_energy: traj.initial_energy,
        final_energy: fs.energy,
        initial_tau: traj.initial_tau,
        final_tau: fs.tau,
        tau_changes: traj.tau_changes,
        max_step_increase: traj.max_step_increase,
        remeshes: fs.remeshes,
        remesh_jump: fs.remesh_jump,
        step_failure: traj.step_failure.as_deref(),
        controls: ctrl,
        diagnostic: &traj.final_diagnostic,
    };
    write_atomic(&dir.join("final.json"), &to_json(&summary)?)?;
    let mut prof = Vec::new();
    match s.format.unwrap_or(Format::Csv) {
        Format::Csv => write_csv(&fs.profile, &mut prof)?,
        Format::Json => write_json(&fs.profile, &mut prof)?,
    }
    let ext = if s.format == Some(Format::Json) { "json" } else { "csv" };
    write_atomic(&dir.join(format!("final_profile.{ext}")), &prof)?;
    let t: Vec<f64> = traj.rows.iter().map(|r| r.t).collect();
    let w: Vec<f64> = traj.rows.iter().map(|r| r.w).collect();
    let pi = std::f64::consts::PI;
    let levels = [("4π".to_string(), 4.0 * pi), ("8π".to_string(), 8.0 * pi)];
    let wmax = w.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let refs: Vec<(String, f64)> = levels.into_iter().filter(|(_, v)| *v <= 1.05 * wmax).collect();
    write_atomic(&dir.join("energy.svg"), svg::energy_svg(&t, &w, "t", "Willmore energy along the flow", &refs).as_bytes())?;
    write_atomic(&dir.join("final_profile.svg"), svg::profile_svg(&fs.profile, "final profile").as_bytes())?;
    eprintln!(
        "{:?} after {} steps: W = {:.8}, r_min = {:.4e}",
        traj.termination, fs.step, fs.energy, fs.neck.r_min
    );
    Ok(Outcome::Pass)
}

fn cmd_homotopy(
    start: f64,
    end: f64,
    delta: f64,
    steps: usize,
    frames: Option<Vec<f64>>,
    s: &Settings,
) -> anyhow::Result<Outcome> {
    if !(start >= end) {
        bail!(Usage(format!("λ_start = {start} must not be below λ_end = {end}")));
    }
    if steps == 0 {
        bail!(Usage("steps must be at least 1".into()));
    }
    for l in [start, end] {
        CatSphParams::symmetric(l, delta, Kind::Beta).map_err(|e| anyhow!(Usage(e.to_string())))?;
    }
    let frames = frames.unwrap_or_else(|| vec![start, 0.5 * (start + end), end]);
    let mut frame_lambdas: Vec<f64> = Vec::new();
    for l in frames {
        if !frame_lambdas.contains(&l) {
            frame_lambdas.push(l);
        }
    }
    let trace = shrinking_trace(start, end, delta, steps)?;
    let dir = s.out_dir("homotopy-out");
    match s.format.unwrap_or(Format::Csv) {
        Format::Csv => write_atomic(&dir.join("trace.csv"), trace.to_csv()?.as_bytes())?,
        Format::Json => write_atomic(&dir.join("trace.json"), &to_json(&trace)?)?,
    }
    let phi = GluingProfile::new(delta)?;
    let mut pics = Vec::new();
    for &l in &frame_lambdas {
        let p = CatSphParams::symmetric(l, delta, Kind::Beta).map_err(|e| anyhow!(Usage(e.to_string())))?;
        let c = build_catsph_with(&p, &phi, SampleSpec::new(s.grid))?;
        pics.push((format!("λ = {l}"), c));
    }
    let title = format!("type-β catenoid spheres, δ = {delta}");
    write_atomic(&dir.join("frames.svg"), svg::frames_svg(&pics, &title).as_bytes())?;
    let refs = [("4π".to_string(), 4.0 * std::f64::consts::PI)];
    let e_svg = svg::energy_svg(&trace.lambdas, &trace.energies, "λ_t", "energy along the shrinking homotopy", &refs);
    write_atomic(&dir.join("energy.svg"), e_svg.as_bytes())?;
    for w in &trace.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "W from {:.8} to {:.8} over {} frames; monotone: {}",
        trace.energies[0],
        trace.end_energy(),
        frame_lambdas.len(),
        trace.monotone
    );
    Ok(if trace.monotone { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_corpus(s: &Settings) -> anyhow::Result<Outcome> {
    let dir = s.out_dir("corpus");
    let fmt = s.format.unwrap_or(Format::Csv);
    let mut so = std::io::stdout().lock();
    for e in corpus::bundled_with(s.seed, s.grid)? {
        let mut b = Vec::new();
        let ext = match fmt {
            Format::Csv => {
                write_csv(&e.curve, &mut b)?;
                "csv"
            }
            Format::Json => {
                write_json(&e.curve, &mut b)?;
                "json"
            }
        };
        let path = dir.join(format!("{}.{ext}", e.name));
        write_atomic(&path, &b)?;
        // a closed pipe is not a failure
        let _ = writeln!(so, "{}", path.display());
    }
    Ok(Outcome::Pass)
}
