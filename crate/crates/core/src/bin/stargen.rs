use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stargen_core::pipeline::{artifacts, build, run_pipeline, write_artifacts, Preset, ReportExport, RunConfig};
use stargen_core::report::{Bound, Check};
use stargen_core::Error;
use wildmatch::WildMatch;

#[derive(Parser)]
#[command(name = "stargen", about = "Build and verify single generators of truncated AH/AF inductive systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline with verification; writes all artifacts and report.json.
    Run(RunArgs),
    /// Renders a report.json as a table.
    Report(ReportArgs),
    /// Builds system, scaffold and generator and writes them without verifying.
    Export(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    truncate: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long = "word-length")]
    word_length: Option<usize>,
    #[arg(long = "tolerance-scale")]
    tolerance_scale: Option<f64>,
    #[arg(long)]
    tensor: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding report.json.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Path of the report file; overrides --out.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Glob over check names and identity tags, e.g. "prod*".
    #[arg(long)]
    filter: Option<String>,
    /// A config file is accepted for symmetry with `run`; only its `out` is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

const USAGE: u8 = 1;
const FAILED: u8 = 2;
const RESOURCE: u8 = 3;

fn warn_conflict<T: PartialEq + std::fmt::Debug>(flag: &str, given: Option<T>, current: &T) {
    if let Some(v) = given {
        if &v != current {
            eprintln!("warning: --{flag} {v:?} ignored, the config file sets {current:?}");
        }
    }
}

fn resolve_config(a: &RunArgs) -> Result<RunConfig, Error> {
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = RunConfig::from_json(&text)?;
        if a.preset.is_some() {
            eprintln!("warning: --preset ignored, the config file defines the system");
        }
        warn_conflict("depth", a.depth, &cfg.depth);
        warn_conflict("truncate", a.truncate, &cfg.truncate);
        warn_conflict("grid", a.grid, &cfg.grid);
        warn_conflict("word-length", a.word_length, &cfg.word_length);
        warn_conflict("tolerance-scale", a.tolerance_scale, &cfg.tolerance_scale);
        if cfg.tensor.is_some() {
            warn_conflict("tensor", a.tensor, &cfg.tensor.unwrap_or(1));
        } else {
            cfg.tensor = a.tensor;
        }
        if cfg.out.is_none() {
            cfg.out = a.out.clone();
        } else if let Some(o) = &a.out {
            warn_conflict("out", Some(o.clone()), cfg.out.as_ref().expect("checked"));
        }
        return Ok(cfg);
    }
    let preset: Preset = a.preset.as_deref().ok_or_else(|| Error::config("preset", "either --preset or --config is required"))?.parse()?;
    let depth = a.depth.unwrap_or(3);
    let mut cfg = RunConfig::preset(preset, depth, a.truncate.unwrap_or(depth - 1).max(1));
    if let Some(g) = a.grid {
        cfg.grid = g;
    }
    if let Some(l) = a.word_length {
        cfg.word_length = l;
    }
    if let Some(t) = a.tolerance_scale {
        cfg.tolerance_scale = t;
    }
    cfg.tensor = a.tensor;
    cfg.out = a.out.clone();
    cfg.validate()?;
    Ok(cfg)
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Io(_) | Error::Json(_) => USAGE,
        e if e.is_resource_or_depth() => RESOURCE,
        _ => FAILED,
    }
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn cmd_run(a: &RunArgs) -> Result<u8, Error> {
    let cfg = resolve_config(a)?;
    let run = run_pipeline(&cfg)?;
    let rep = run.report_export();
    let dir = out_dir(&cfg);
    for p in write_artifacts(&dir, &artifacts(&run.snapshot, &run.qwu, &run.bundle), Some(&rep))? {
        println!("wrote {}", p.display());
    }
    print_table(&rep.checks);
    println!("{}", summary_line(&rep.checks));
    println!(
        "single generation: closure dimension {} of {} at word length {}",
        rep.single_generation.closure_dimension, rep.single_generation.ambient_dimension, rep.word_length
    );
    Ok(if rep.all_pass { 0 } else { FAILED })
}

fn cmd_export(a: &RunArgs) -> Result<u8, Error> {
    let cfg = resolve_config(a)?;
    let (snap, qwu, bundle) = build(&cfg)?;
    for p in write_artifacts(&out_dir(&cfg), &artifacts(&snap, &qwu, &bundle), None)? {
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn load_report(path: &Path) -> Result<Vec<Check>, Error> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("checks").is_none() && value.as_object().is_some_and(|o| o.is_empty()) {
        return Ok(Vec::new());
    }
    Ok(serde_json::from_value::<ReportExport>(value)?.checks)
}

fn cmd_report(a: &ReportArgs) -> Result<u8, Error> {
    let dir = match &a.config {
        Some(p) => RunConfig::from_json(&std::fs::read_to_string(p)?)?.out.unwrap_or_else(|| a.out.clone()),
        None => a.out.clone(),
    };
    let path = a.report.clone().unwrap_or_else(|| dir.join("report.json"));
    let mut checks = load_report(&path)?;
    if let Some(f) = &a.filter {
        let m = WildMatch::new(f);
        checks.retain(|c| m.matches(&c.check) || m.matches(&c.identity_tag));
    }
    if checks.is_empty() {
        println!("no checks found");
        return Ok(0);
    }
    print_table(&checks);
    println!("{}", summary_line(&checks));
    Ok(if checks.iter().all(Check::passed) { 0 } else { FAILED })
}

fn print_table(checks: &[Check]) {
    let w = checks.iter().map(|c| c.check.len()).max().unwrap_or(5).max(5);
    let t = checks.iter().map(|c| c.identity_tag.len()).max().unwrap_or(3).max(3);
    println!("{:<6} {:<w$} {:<t$} {:>12} {:>4} {:>12}  detail", "status", "check", "tag", "value", "", "tolerance");
    for c in checks {
        let rel = match c.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        let status = if c.passed() { "pass" } else { "FAIL" };
        println!(
            "{status:<6} {:<w$} {:<t$} {:>12.3e} {rel:>4} {:>12.3e}  {}",
            c.check,
            c.identity_tag,
            c.value,
            c.tolerance,
            c.detail.as_deref().unwrap_or("")
        );
    }
}

/// Count of passes and the largest deviation in each check family (the
/// part of the name before the first dot).
fn summary_line(checks: &[Check]) -> String {
    let mut fams: Vec<(String, f64)> = Vec::new();
    for c in checks.iter().filter(|c| c.bound == Bound::AtMost) {
        let fam = c.check.split('.').next().unwrap_or(&c.check).to_string();
        match fams.iter_mut().find(|(f, _)| *f == fam) {
            Some((_, v)) => *v = v.max(c.value),
            None => fams.push((fam, c.value)),
        }
    }
    let passed = checks.iter().filter(|c| c.passed()).count();
    let parts: Vec<String> = fams.iter().map(|(f, v)| format!("{f} {v:.1e}")).collect();
    format!("{passed}/{} checks pass; max deviation per family: {}", checks.len(), parts.join(", "))
}

fn init_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("STARGEN_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Error::config("STARGEN_THREADS", format!("`{v}` is not a positive integer")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("STARGEN_THREADS", e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Report(a) => cmd_report(a),
        Command::Export(a) => cmd_export(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
