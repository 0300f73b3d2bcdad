//! `nca`: batch contingency studies and the real-time analysis service.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use nca_core::contingency::ResultStatus;
use nca_core::study::{prepare, run_study, StudyError};
use nca_core::study_io::{parse_network_file, parse_study_file, write_ranking, write_report, NetworkSpec, ReportFormat, StudyReport, StudySpec};
use nca_core::{reference_network, NetworkModel};
use nca_realtime::history::HistoryError;
use nca_realtime::{HistoryStore, Service};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "nca", version, about = "N-1 contingency analysis for plant auxiliary power systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full study and write the violation report.
    Run(RunArgs),
    /// Serve the real-time API, analysing the network every cycle.
    Serve(ServeArgs),
    /// Parse and validate the inputs without solving anything.
    Verify(Inputs),
}

#[derive(Args)]
struct Inputs {
    /// Network document (.nca-net.json).
    #[arg(long, required_unless_present = "fixture", conflicts_with = "fixture")]
    network: Option<PathBuf>,
    /// Study document (.nca-study.json).
    #[arg(long, required_unless_present = "fixture", conflicts_with = "fixture")]
    study: Option<PathBuf>,
    /// Use the built-in reference network and study.
    #[arg(long)]
    fixture: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Where to write the report. Without it only the ranking is printed.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Sweep threads (all cores by default).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: String,
    #[arg(long, default_value_t = 1000)]
    cycle_ms: u64,
    /// Line-delimited history file, replayed at startup.
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long, default_value_t = 730)]
    retention_days: u64,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input {
        path: String,
        #[source]
        source: StudyError,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error("server: {0}")]
    Server(std::io::Error),
    #[error("--cycle-ms must be positive")]
    CycleMs,
}

const EXIT_CLEAN: u8 = 0;
const EXIT_VIOLATIONS: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_INPUT: u8 = 3;

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn load(inputs: &Inputs) -> Result<(NetworkModel, StudySpec), CliError> {
    let (net, study, label): (NetworkSpec, StudySpec, String) = match (&inputs.network, &inputs.study) {
        (Some(n), Some(s)) => {
            let net = parse_network_file(&read(n)?).map_err(|e| CliError::Input {
                path: n.display().to_string(),
                source: e.into(),
            })?;
            let study = parse_study_file(&read(s)?).map_err(|e| CliError::Input {
                path: s.display().to_string(),
                source: e.into(),
            })?;
            (net, study, format!("{} + {}", n.display(), s.display()))
        }
        _ => {
            let (net, study) = reference_network();
            (net, study, "built-in fixture".into())
        }
    };
    let model = prepare(&net, &study).map_err(|source| CliError::Input { path: label, source })?;
    Ok((model, study))
}

/// Highest applicable code: diverged over violations over clean.
fn exit_status(report: &StudyReport) -> u8 {
    let all = std::iter::once(&report.base).chain(&report.results);
    let mut code = EXIT_CLEAN;
    for r in all {
        if r.status == ResultStatus::Diverged {
            return EXIT_DIVERGED;
        }
        if !r.is_clear() {
            code = EXIT_VIOLATIONS;
        }
    }
    code
}

fn run(args: RunArgs) -> Result<u8, CliError> {
    let (model, study) = load(&args.inputs)?;
    let report = run_study(&model, &study, args.workers).map_err(|source| CliError::Input {
        path: "study".into(),
        source,
    })?;
    if let Some(out) = &args.out {
        std::fs::write(out, write_report(&report, args.format)).map_err(|source| CliError::Write {
            path: out.clone(),
            source,
        })?;
    } else {
        log::info!("no --out given; report not written");
    }
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(&write_ranking(&report.ranking, args.format));
    let _ = stdout.flush();
    Ok(exit_status(&report))
}

fn verify(inputs: Inputs) -> Result<u8, CliError> {
    let (model, study) = load(&inputs)?;
    println!(
        "ok: {} buses, {} branches, {} breakers; {} contingencies, {} remedial plans",
        model.buses.len(),
        model.branches.len(),
        model.breakers.len(),
        study.contingencies.len(),
        study.ras_catalog.len()
    );
    for w in model.warnings() {
        println!("warning: {w}");
    }
    Ok(EXIT_CLEAN)
}

async fn shutdown_signal() {
    if let Err(e) = tokio::signal::ctrl_c().await {
        log::error!("cannot listen for interrupt: {e}");
        std::future::pending::<()>().await;
    }
    log::info!("interrupt received, finishing the current cycle");
}

fn serve(args: ServeArgs) -> Result<u8, CliError> {
    if args.cycle_ms == 0 {
        return Err(CliError::CycleMs);
    }
    let (model, study) = load(&args.inputs)?;
    let retention_ms = args.retention_days.saturating_mul(24 * 3600 * 1000);
    let history = match &args.history {
        Some(p) => HistoryStore::open(p, retention_ms)?,
        None => HistoryStore::in_memory(retention_ms),
    };
    let service = Arc::new(Service::new(model, study, history, args.workers));
    let rt = tokio::runtime::Runtime::new().map_err(CliError::Server)?;
    rt.block_on(async {
        let addr = format!("{}:{}", args.bind, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|source| CliError::Bind { addr: addr.clone(), source })?;
        let local = listener.local_addr().map_err(CliError::Server)?;
        eprintln!("listening on http://{local}");
        nca_realtime::serve(service, listener, Duration::from_millis(args.cycle_ms), shutdown_signal())
            .await
            .map_err(CliError::Server)
    })?;
    Ok(EXIT_CLEAN)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NCA_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_CLEAN });
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Serve(a) => serve(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
