//! `caustic-forge`: deform a convex billiard boundary until it carries a
//! caustic of rotation number 1/q, sweep q, and re-verify stored results.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use caustic_core::solver::{forge, forge_smoothed, ForgeConfig, ForgeResult};
use caustic_core::verify::{envelope_csv, verify, CausticReport, VerifyThresholds};
use caustic_core::{presets, Error, FourierCurve};
use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;
use serde_json::{json, Value};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const THREADS_ENV: &str = "CAUSTIC_FORGE_THREADS";

/// Orbits launched by the porism check.
const PORISM_SAMPLES: usize = 100;
/// Envelope resolution.
const ENVELOPE_POINTS: usize = 512;

#[derive(Parser)]
#[command(name = "caustic-forge", version, about = "Build convex billiard tables with a rational caustic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forge one boundary for a single q and verify the result.
    Forge(ForgeArgs),
    /// Forge a range of q and write one CSV row per q.
    Sweep(SweepArgs),
    /// Re-run the porism and envelope checks on a stored result.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct Source {
    /// Boundary JSON file.
    #[arg(long, conflicts_with = "preset")]
    boundary: Option<PathBuf>,
    /// Built-in boundary: circle, ellipse:A,B, perturbed[:m=a,...], smooth-tail[:eps].
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args, Clone)]
struct Tuning {
    /// Lazutkin order k of the initial approximation.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Grid points per 1/q interval.
    #[arg(long, default_value_t = 32)]
    oversample: usize,
    /// Target sup norm of the defect.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Non-resonant sweeps before the Newton loop.
    #[arg(long, default_value_t = 2)]
    nek_sweeps: usize,
    /// Smooth the radius of curvature first, keeping modes up to FRACTION * q.
    #[arg(long, value_name = "FRACTION")]
    smooth: Option<f64>,
}

#[derive(Args)]
struct ForgeArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    q: usize,
    #[command(flatten)]
    tuning: Tuning,
    /// Result JSON.
    #[arg(long)]
    out: PathBuf,
    /// Optional envelope polyline CSV.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    q_min: usize,
    #[arg(long)]
    q_max: usize,
    #[command(flatten)]
    tuning: Tuning,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Result JSON written by `forge`.
    result: PathBuf,
    /// Optional envelope polyline CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = PORISM_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    closure_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    tangency_tol: f64,
}

/// Exit status: 1 for bad input or usage, 2 for numerical failure.
enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidBoundary { .. } | Error::Io(_) | Error::Json(_) => {
                Failure::Input(e.to_string())
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.command {
        Command::Forge(a) => cmd_forge(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}

fn load_source(src: &Source) -> Result<(FourierCurve, String), Failure> {
    match (&src.boundary, &src.preset) {
        (Some(p), None) => Ok((FourierCurve::load(p)?, p.display().to_string())),
        (None, Some(s)) => Ok((presets::from_spec(s)?, format!("preset:{s}"))),
        _ => Err(Failure::Input("exactly one of --boundary or --preset is required".into())),
    }
}

fn config_for(q: usize, t: &Tuning) -> Result<ForgeConfig, Failure> {
    let mut cfg = ForgeConfig::new(q);
    cfg.lazutkin_order = t.order;
    cfg.oversample = t.oversample;
    cfg.tol_e = t.tol;
    cfg.nek_sweeps = t.nek_sweeps;
    cfg.validate()?;
    if let Some(f) = t.smooth {
        if f.is_nan() || f <= 0.0 {
            return Err(Failure::Input(format!("smoothing fraction must be positive, got {f}")));
        }
    }
    Ok(cfg)
}

fn run_forge(c: &FourierCurve, cfg: &ForgeConfig, smooth: Option<f64>) -> caustic_core::Result<ForgeResult> {
    match smooth {
        Some(f) => forge_smoothed(c, cfg, f * cfg.q as f64),
        None => forge(c, cfg),
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(out: &Path, command: &str, input: &str, config: Value, start: Instant, success: bool) -> CmdResult {
    let m = json!({
        "command": command,
        "input": input,
        "config": config,
        "version": VERSION,
        "wall_ms": start.elapsed().as_millis() as u64,
        "success": success,
    });
    write_json(&manifest_path(out), &m)
}

fn write_json(path: &Path, v: &Value) -> CmdResult {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Input(e.to_string()))? + "\n";
    fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn tuning_json(t: &Tuning) -> Value {
    json!({
        "order": t.order,
        "oversample": t.oversample,
        "tol": t.tol,
        "nek_sweeps": t.nek_sweeps,
        "smooth": t.smooth,
    })
}

fn result_json(r: &ForgeResult, report: Option<&CausticReport>) -> Value {
    json!({
        "version": VERSION,
        "q": r.config.q,
        "config": r.config,
        "input_boundary": r.input_curve.to_json_value(),
        "forged_boundary": r.forged_curve.to_json_value(),
        "residual_history": r.residual_history,
        "deformation": r.deformation,
        "converged": r.converged,
        "failure": r.failure,
        "u_init": r.u_init.samples(),
        "net_radial_log": r.net_radial_log.values(),
        "diagnostics": r.diagnostics,
        "verify": report,
    })
}

fn cmd_forge(a: ForgeArgs) -> CmdResult {
    let start = Instant::now();
    let (c, input) = load_source(&a.source)?;
    let cfg = config_for(a.q, &a.tuning)?;
    c.validate(&cfg.thresholds)?;
    let echo = json!({ "q": a.q, "tuning": tuning_json(&a.tuning) });
    let r = match run_forge(&c, &cfg, a.tuning.smooth) {
        Ok(r) => r,
        Err(e) => {
            write_manifest(&a.out, "forge", &input, echo, start, false)?;
            return Err(e.into());
        }
    };
    let report = if r.converged {
        Some(verify(&r.forged_curve, cfg.q, PORISM_SAMPLES, ENVELOPE_POINTS)?)
    } else {
        None
    };
    write_json(&a.out, &result_json(&r, report.as_ref()))?;
    if let (Some(path), Some(rep)) = (&a.report, &report) {
        fs::write(path, envelope_csv(&rep.envelope_points))
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let ok = r.converged && report.as_ref().is_some_and(|rep| rep.passes(&VerifyThresholds::default()));
    write_manifest(&a.out, "forge", &input, echo, start, ok)?;
    println!(
        "q = {}: residual {:.3e}, deformation {:.3e}, {} KAM steps",
        cfg.q,
        r.final_residual(),
        r.deformation,
        r.kam_iters()
    );
    if let Some(rep) = &report {
        println!("closure {:.3e}, tangency {:.3e}", rep.max_closure_error, rep.max_tangency_residual);
    }
    match (&r.failure, ok) {
        (Some(f), _) => Err(Failure::Numerical(f.clone())),
        (None, false) => Err(Failure::Numerical("forged boundary failed verification".into())),
        (None, true) => Ok(()),
    }
}

struct Row {
    q: usize,
    deformation: f64,
    final_residual: f64,
    kam_iters: usize,
    closure: f64,
    wall_ms: u128,
    status: String,
}

fn sweep_one(c: &FourierCurve, cfg: &ForgeConfig, smooth: Option<f64>) -> Row {
    let start = Instant::now();
    let mut row = Row {
        q: cfg.q,
        deformation: f64::NAN,
        final_residual: f64::NAN,
        kam_iters: 0,
        closure: f64::NAN,
        wall_ms: 0,
        status: String::new(),
    };
    row.status = match run_forge(c, cfg, smooth) {
        Ok(r) => {
            row.deformation = r.deformation;
            row.final_residual = r.final_residual();
            row.kam_iters = r.kam_iters();
            match (&r.failure, caustic_core::verify::porism_check(&r.forged_curve, cfg.q, PORISM_SAMPLES)) {
                (Some(_), _) => "nonconvergence".into(),
                (None, Ok((closure, _))) => {
                    row.closure = closure;
                    "ok".into()
                }
                (None, Err(_)) => "verify_error".into(),
            }
        }
        Err(e) => format!("error: {}", e.to_string().replace(',', ";")),
    };
    row.wall_ms = start.elapsed().as_millis();
    info!("q = {}: {}", row.q, row.status);
    row
}

fn thread_count() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Input(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn cmd_sweep(a: SweepArgs) -> CmdResult {
    let start = Instant::now();
    if a.q_min > a.q_max {
        return Err(Failure::Input(format!("empty q range {}..={}", a.q_min, a.q_max)));
    }
    let (c, input) = load_source(&a.source)?;
    let cfgs = (a.q_min..=a.q_max).map(|q| config_for(q, &a.tuning)).collect::<Result<Vec<_>, _>>()?;
    c.validate(&cfgs[0].thresholds)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure::Input(e.to_string()))?;
    let rows: Vec<Row> = pool.install(|| cfgs.par_iter().map(|cfg| sweep_one(&c, cfg, a.tuning.smooth)).collect());

    let mut csv = String::from("q,deformation,final_residual,kam_iters,closure_error,wall_ms,status\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:e},{:e},{},{:e},{},{}\n",
            r.q, r.deformation, r.final_residual, r.kam_iters, r.closure, r.wall_ms, r.status
        ));
    }
    fs::write(&a.out, csv).map_err(|e| Failure::Input(format!("cannot write {}: {e}", a.out.display())))?;
    let ok = rows.iter().filter(|r| r.status == "ok").count();
    // at least 80% of the rows must succeed
    let success = 5 * ok >= 4 * rows.len();
    let echo = json!({ "q_min": a.q_min, "q_max": a.q_max, "tuning": tuning_json(&a.tuning) });
    write_manifest(&a.out, "sweep", &input, echo, start, success)?;
    println!("{ok} of {} runs succeeded", rows.len());
    if success {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("only {ok} of {} runs succeeded", rows.len())))
    }
}

fn cmd_verify(a: VerifyArgs) -> CmdResult {
    let start = Instant::now();
    let text = fs::read_to_string(&a.result)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", a.result.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", a.result.display())))?;
    let q = v
        .get("q")
        .and_then(Value::as_u64)
        .ok_or_else(|| Failure::Input("result file has no integer `q`".into()))? as usize;
    let block = v
        .get("forged_boundary")
        .ok_or_else(|| Failure::Input("result file has no `forged_boundary`".into()))?;
    let c = FourierCurve::from_json_value(block)?;
    let th = VerifyThresholds { closure: a.closure_tol, tangency: a.tangency_tol };
    let rep = verify(&c, q, a.samples, ENVELOPE_POINTS)?;
    if let Some(path) = &a.report {
        fs::write(path, envelope_csv(&rep.envelope_points))
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let ok = rep.passes(&th);
    let echo = json!({ "q": q, "samples": a.samples, "closure_tol": a.closure_tol, "tangency_tol": a.tangency_tol });
    let manifest_target = a.report.clone().unwrap_or_else(|| a.result.with_extension("verify"));
    write_manifest(&manifest_target, "verify", &a.result.display().to_string(), echo, start, ok)?;
    println!(
        "q = {q}: closure {:.3e}, tangency {:.3e}, winds once: {}, envelope inside: {}",
        rep.max_closure_error, rep.max_tangency_residual, rep.rotation_number_checked, rep.envelope_inside
    );
    if ok {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("verification failed: closure error {:.3e}", rep.max_closure_error)))
    }
}
