use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use swarmcmp_core::harness::{self, ExperimentConfig, Layout};
use swarmcmp_core::Error;

const WORKERS_VAR: &str = "SWARMCMP_WORKERS";

#[derive(Parser)]
#[command(name = "swarmcmp", version, about = "Simulate swarm behaviours and compare them by feature set")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (or resume) the trajectory dataset
    Simulate(Common),
    /// Bring the feature cache up to date
    Features(Common),
    /// Write one similarity report per setting, feature set and measure
    Similarity(Common),
    /// Train and evaluate SOM classifiers per feature set
    Classify(Common),
    /// Consolidate the reports under --out into summary.json and summary.txt
    Report(ReportArgs),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; omitted fields take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Accepted for symmetry with the other commands; the report reads the
    /// configuration stored in the output directory
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { kind: e.kind(), message: e.to_string() }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    let cfg = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure { kind: "config", message: format!("{WORKERS_VAR} must be a positive integer, got `{raw}`") })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { kind: "config", message: e.to_string() })
}

fn run(cli: Cli) -> Result<serde_json::Value, Failure> {
    configure_workers()?;
    let out = match cli.command {
        Command::Simulate(c) => {
            let cfg = load_config(c.config.as_deref())?;
            let summary = harness::generate_dataset(&cfg, &Layout::new(&c.out))?.into_result()?;
            json!({ "command": "simulate", "summary": summary })
        }
        Command::Features(c) => {
            let cfg = load_config(c.config.as_deref())?;
            let summary = harness::extract_features(&cfg, &Layout::new(&c.out))?.into_result()?;
            json!({ "command": "features", "summary": summary })
        }
        Command::Similarity(c) => {
            let cfg = load_config(c.config.as_deref())?;
            let layout = Layout::new(&c.out);
            let written = harness::run_similarity(&cfg, &layout)?;
            let files: Vec<String> = written.iter().map(|p| layout.relative(p)).collect();
            json!({ "command": "similarity", "reports": files })
        }
        Command::Classify(c) => {
            let cfg = load_config(c.config.as_deref())?;
            let rows = harness::run_classification(&cfg, &Layout::new(&c.out))?;
            json!({ "command": "classify", "accuracy": rows })
        }
        Command::Report(r) => {
            if let Some(p) = &r.config {
                load_config(Some(p))?;
            }
            let summary = harness::report(&Layout::new(&r.out))?;
            json!({ "command": "report", "complete": summary.is_complete(), "missing": summary.missing })
        }
    };
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", json!({ "error": "usage", "message": message.trim() }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("json"));
            ExitCode::SUCCESS
        }
        Err(f) => {
            log::error!("{}", f.message);
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::FAILURE
        }
    }
}
