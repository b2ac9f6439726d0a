//! `lab <kind> --config <file> [--out <dir>] [--seed <u64>] [--threads <k>]`
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4 failed verification checks.
//! A `manifest.json` is written to the output directory on every run that gets that far.

mod config;
mod kinds;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;

use config::{ExperimentConfig, Kind};
use kinds::RunError;
use output::Artifacts;

const OUT_DIR_ENV: &str = "LAB_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "lab_out";

#[derive(Debug, Parser)]
#[command(name = "lab", version, about = "Oscillator-chain simulation and verification experiments")]
struct Cli {
    kind: Kind,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; takes precedence over LAB_OUT_DIR and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the base seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn version_string() -> String {
    let described = std::process::Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty"])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    match described {
        Some(d) => format!("v{}-g{}", env!("CARGO_PKG_VERSION"), d.trim_start_matches('g')),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

struct Failure {
    code: u8,
    module: String,
    message: String,
}

fn config_failure(message: String) -> Failure {
    Failure { code: 2, module: "harness_cli".into(), message }
}

/// Module an error is reported under: variants that identify their origin keep it,
/// everything else is attributed to the stage the kind runs.
fn error_module(kind: Kind, err: &chainlab::error::Error) -> &'static str {
    use chainlab::error::Error as E;
    match err {
        E::Quadrature(_) | E::Range { .. } | E::InvalidPotential(_) => "potential_thermo",
        E::SamplerStuck(_) => "gibbs_sampling",
        E::BlowUp { .. } => "chain_dynamics",
        E::PdeBlowUp { .. } => "psystem_solver",
        E::Io(_) => "io",
        _ => match kind {
            Kind::Thermo => "potential_thermo",
            Kind::Simulate => "chain_dynamics",
            Kind::Hydro | Kind::Fluct => "fluctuation_analysis",
            Kind::Verify => "stat_verify",
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);

    let raw = std::fs::read_to_string(&cli.config).map_err(|e| config_failure(format!("cannot read {}: {e}", cli.config.display())));
    let echo: serde_json::Value = raw.as_ref().ok().and_then(|t| serde_json::from_str(t).ok()).unwrap_or(serde_json::Value::Null);
    let parsed = raw.and_then(|t| ExperimentConfig::parse(&t, cli.kind).map_err(|e| config_failure(e.to_string())));

    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| parsed.as_ref().ok().and_then(|c| c.out_dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("lab: cannot create output directory {}: {e}", out_dir.display());
        return ExitCode::from(3);
    }

    let mut art = Artifacts::new(out_dir.clone());
    let mut seed = None;
    let result: Result<(), Failure> = parsed.and_then(|mut cfg| {
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        seed = Some(cfg.seed);
        if let Some(k) = cli.threads {
            if k == 0 {
                return Err(config_failure("--threads must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| Failure { code: 3, module: "harness_cli".into(), message: e.to_string() })?;
        }
        kinds::run_kind(cli.kind, &cfg, &mut art).map_err(|e| match e {
            RunError::Numerical(err) => Failure { code: 3, module: error_module(cli.kind, &err).into(), message: err.to_string() },
            RunError::Io(err) => Failure { code: 3, module: "io".into(), message: format!("{err:#}") },
            RunError::ChecksFailed(k) => Failure { code: 4, module: "stat_verify".into(), message: format!("{k} verification checks failed") },
        })
    });

    let (code, error) = match &result {
        Ok(()) => (0u8, serde_json::Value::Null),
        Err(f) => (f.code, json!({ "module": f.module, "message": f.message })),
    };
    let manifest = json!({
        "tool": "lab",
        "version": version_string(),
        "kind": cli.kind,
        "config_path": cli.config.display().to_string(),
        "config": echo,
        "seed": seed,
        "threads": cli.threads.unwrap_or_else(rayon::current_num_threads),
        "started_unix": started_unix,
        "wall_time_s": started.elapsed().as_secs_f64(),
        "status": if code == 0 { "ok" } else { "error" },
        "exit_code": code,
        "error": error,
        "artifacts": art.files,
    });
    let text = serde_json::to_string_pretty(&manifest).unwrap_or_default();
    if let Err(e) = output::write_text(&out_dir.join("manifest.json"), &text) {
        eprintln!("lab: cannot write manifest: {e}");
    }
    if let Err(f) = &result {
        eprintln!("lab: [{}] {}", f.module, f.message);
    }
    ExitCode::from(code)
}
