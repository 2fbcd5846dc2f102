//! `mixscale <experiment> [--key value]...`
//!
//! Exit status: 0 when every check passes, 1 when some check fails,
//! 2 for usage errors, 3 when the run or the output fails.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_overrides, read_config_file, Params};
use experiments::{Experiment, RunError, ALL};

const DEFAULT_OUT: &str = "mixscale-out";

#[derive(Parser, Debug)]
#[command(name = "mixscale", version, about = "Mixing-scale experiments with CSV output")]
struct Cli {
    /// Flat key=value file applied before command-line overrides.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, env = "MIXSCALE_OUT")]
    out: Option<PathBuf>,

    /// Experiment name, optionally preceded by `run`.
    experiment: String,

    /// Parameter overrides as `--key value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    params: Vec<String>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("mixscale: {msg}");
    ExitCode::from(2)
}

fn known() -> String {
    ALL.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut args = cli.params;
    let mut name = cli.experiment;
    if name == "run" {
        if args.is_empty() {
            return usage(format!("`run` needs an experiment: {}", known()));
        }
        name = args.remove(0);
    }
    let Some(exp) = Experiment::lookup(&name) else {
        return usage(format!("unknown experiment {name:?}; expected one of {}", known()));
    };

    let overrides = match parse_overrides(&args) {
        Ok(o) => o,
        Err(e) => return usage(format!("invalid configuration {e}")),
    };
    // `--config` and `--out` may also follow the experiment name.
    let mut config_path = cli.config;
    let mut out = cli.out;
    let mut assignments = Vec::new();
    let mut rest = Vec::new();
    for (k, v) in overrides {
        match k.as_str() {
            "config" => config_path = Some(PathBuf::from(v)),
            "out" => out = Some(PathBuf::from(v)),
            _ => rest.push((k, v)),
        }
    }
    if let Some(path) = &config_path {
        match read_config_file(path) {
            Ok(kv) => assignments.extend(kv),
            Err(e) => return usage(format!("invalid configuration {e}")),
        }
    }
    assignments.extend(rest);
    let params = match Params::resolve(exp.defaults(), &assignments) {
        Ok(p) => p,
        Err(e) => return usage(format!("invalid configuration {e}")),
    };

    let reports = match exp.run(&params) {
        Ok(r) => r,
        Err(RunError::Usage(e)) => return usage(format!("invalid configuration {e}")),
        Err(RunError::Core(e)) => {
            eprintln!("mixscale: {}: {e}", exp.name());
            return ExitCode::from(3);
        }
    };

    let dir = out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let written = match output::write_all(&dir, exp, &params, &reports) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("mixscale: writing {}: {e}", dir.display());
            return ExitCode::from(3);
        }
    };
    for rep in &reports {
        let failed = rep.failures().count();
        println!(
            "{}: {} rows, {} checks, {} failed",
            rep.name,
            rep.rows.len(),
            rep.checks.len(),
            failed
        );
        for c in rep.failures() {
            println!("  FAIL {}: {:e} > {:e}", c.label, c.lhs, c.rhs);
        }
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    if reports.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
