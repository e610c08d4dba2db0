mod args;
mod canonical;
mod commands;
mod config;
mod error;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Task};
use commands::{Outcome, Status};
use error::{CliError, EXIT_INFEASIBLE, EXIT_INTERNAL, EXIT_USAGE};

const THREADS_VAR: &str = "VML_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn parse_cli() -> Result<Result<Cli, ExitCode>, CliError> {
    let raw: Vec<String> = std::env::args().collect();
    let argv = match config::extract(&raw)? {
        Some(path) => config::ConfigFile::load(&path)?.to_argv(&raw[0])?,
        None => raw,
    };
    Ok(match Cli::try_parse_from(argv) {
        Ok(cli) => Ok(cli),
        Err(e) => {
            let _ = e.print();
            Err(if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS })
        }
    })
}

fn execute(task: &Task, seed: u64) -> Result<Outcome, CliError> {
    match task {
        Task::VortexSolve(a) => commands::vortex_solve(a),
        Task::HeckeBuild(a) => commands::hecke_build(a),
        Task::StrataEnum(a) => commands::strata_enum(a),
        Task::Pi1Moduli(a) => commands::pi1_moduli(a),
        Task::Pi1Abelianize(a) => commands::pi1_abelianize(a),
        Task::Pi1Nogo(a) => commands::pi1_nogo(a),
        Task::ReportAll(a) => {
            let start = Instant::now();
            let criteria = report::run(seed, a.grid);
            for c in &criteria {
                eprintln!("criterion {} ({}): {}", c.id, c.title, if c.passed() { "PASS" } else { "FAIL" });
            }
            eprintln!("report-all finished in {:.2} s", start.elapsed().as_secs_f64());
            let (results, diagnostics) = report::summarize(&criteria);
            let status = if criteria.iter().all(report::Criterion::passed) { Status::Ok } else { Status::Failed };
            Ok(Outcome { status, results, diagnostics })
        }
    }
}

fn envelope(task: &Task, seed: u64, outcome: Outcome) -> Value {
    let mut doc = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config_echo": {
            "subcommand": task.name(),
            "parameters": task.parameters(),
            "output_path": task.output().out.as_ref().map(|p| p.display().to_string()),
            "seed": seed,
        },
        "results": outcome.results,
        "diagnostics": outcome.diagnostics,
        "seed": seed,
        "status": outcome.status.label(),
    });
    if matches!(task, Task::ReportAll(_)) {
        let digest = canonical::sha256_hex(&canonical::to_string(&doc));
        doc["signature"] = json!({"algorithm": "sha256", "digest": digest});
    }
    doc
}

fn run() -> Result<ExitCode, CliError> {
    let cli = match parse_cli()? {
        Ok(cli) => cli,
        Err(code) => return Ok(code),
    };
    configure_threads()?;
    let task = Task::from(cli.command);
    let outcome = execute(&task, cli.seed)?;
    let code = match outcome.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
        Status::Failed => ExitCode::from(EXIT_INTERNAL),
    };
    let text = canonical::to_string(&envelope(&task, cli.seed, outcome));
    match &task.output().out {
        Some(path) => canonical::write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn main() -> ExitCode {
    run().unwrap_or_else(|e| {
        eprintln!("vml: {e}");
        e.exit_code()
    })
}
