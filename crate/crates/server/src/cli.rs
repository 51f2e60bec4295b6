//! The `trailrag` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trailrag_core::eval::{k_sweep, parse_cases, run_eval, sweep_csv, EvalCase, EvalSettings, DEFAULT_THRESHOLD};
use trailrag_core::fixtures;
use trailrag_core::ingest::{import_corpus, RelevanceConfig};

use crate::{build_engine, build_eval_embedder, build_state, open_store, router, serve, shutdown_signal};
use crate::{ConfigLayer, LogSink, ServerConfig};

#[derive(Debug, Parser)]
#[command(name = "trailrag", version, about = "Trail recommendation chatbot engine")]
pub struct Cli {
    /// TOML configuration file; TRAILRAG_* variables and flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON snapshot file backing the store.
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    /// Chat model endpoint; disables the mock model.
    #[arg(long, global = true)]
    pub llm_endpoint: Option<String>,
    /// Embedding service endpoint; default is the offline reference embedder.
    #[arg(long, global = true)]
    pub embedder_endpoint: Option<String>,
    /// JSON-lines script for the mock model.
    #[arg(long, global = true)]
    pub mock_script: Option<PathBuf>,
    /// Mock model delay per prompt character, in microseconds.
    #[arg(long, global = true)]
    pub mock_delay_us: Option<u64>,
}

impl Overrides {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            store_path: self.store.clone(),
            mock_llm: self.llm_endpoint.as_ref().map(|_| false),
            llm_endpoint: self.llm_endpoint.clone(),
            embedder_endpoint: self.embedder_endpoint.clone(),
            mock_script: self.mock_script.clone(),
            mock_delay_us: self.mock_delay_us,
            ..ConfigLayer::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Import a trails file and a reviews file into the store.
    Ingest(IngestArgs),
    /// Offline evaluation.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bind: Option<String>,
    /// Default number of reviews retrieved per answer.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub admin: bool,
    /// Allowed CORS origin; repeat for several.
    #[arg(long = "cors-origin")]
    pub cors_origins: Vec<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub trails: PathBuf,
    #[arg(long)]
    pub reviews: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct EvalCommon {
    /// JSON-lines cases; default is the bundled 25-case fixture.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "on")]
    pub rag: OnOff,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Run cases in parallel; latency is not reported.
    #[arg(long)]
    pub parallel: bool,
    /// Write the output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// One evaluation run; prints the JSON report.
    Run {
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        common: EvalCommon,
    },
    /// One run per k; prints a CSV table.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5, 10])]
        ks: Vec<usize>,
        #[command(flatten)]
        common: EvalCommon,
    },
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            1
        }
    }
}

fn load_config(cli: &Cli, extra: ConfigLayer) -> Result<ServerConfig, String> {
    let file = match &cli.config {
        Some(p) => ConfigLayer::from_file(p).map_err(|e| e.to_string())?,
        None => ConfigLayer::default(),
    };
    let env = ConfigLayer::from_env(std::env::vars()).map_err(|e| e.to_string())?;
    ServerConfig::layered([file, env, cli.overrides.layer(), extra]).map_err(|e| e.to_string())
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn load_cases(fixture: Option<&Path>) -> Result<Vec<EvalCase>, String> {
    match fixture {
        Some(p) => {
            let f = std::fs::File::open(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_cases(f, &p.display().to_string()).map_err(|e| e.to_string())
        }
        None => Ok(fixtures::eval_cases()),
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    match &cli.command {
        Command::Serve(args) => {
            let extra = ConfigLayer {
                bind: args.bind.clone(),
                default_k: args.k,
                admin_enabled: args.admin.then_some(true),
                cors_origins: (!args.cors_origins.is_empty()).then(|| args.cors_origins.clone()),
                ..ConfigLayer::default()
            };
            let cfg = load_config(&cli, extra)?;
            run_server(cfg, err)
        }
        Command::Ingest(args) => {
            // Importing into a store pre-seeded with the bundled corpus would
            // mix the two.
            let cfg = load_config(&cli, ConfigLayer { load_fixture: Some(false), ..ConfigLayer::default() })?;
            let store = open_store(&cfg).map_err(|e| e.to_string())?;
            match import_corpus(&args.trails, &args.reviews, &store, &RelevanceConfig::default()) {
                Ok(report) => {
                    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
                    emit(&format!("{text}\n"), None, out)?;
                    Ok(0)
                }
                Err(e) => {
                    let _ = writeln!(err, "ingest failed: {e}");
                    Ok(1)
                }
            }
        }
        Command::Eval(cmd) => {
            let cfg = load_config(&cli, ConfigLayer::default())?;
            let engine = build_engine(&cfg).map_err(|e| e.to_string())?;
            let scorer = build_eval_embedder(&cfg);
            let (common, ks) = match cmd {
                EvalCommand::Run { k, common } => (common, vec![*k]),
                EvalCommand::Sweep { ks, common } => (common, ks.clone()),
            };
            let cases = load_cases(common.fixture.as_deref())?;
            let settings = EvalSettings {
                k: ks.first().copied().unwrap_or(1),
                rag_enabled: common.rag == OnOff::On,
                threshold: common.threshold,
                parallel: common.parallel,
            };
            let text = match cmd {
                EvalCommand::Run { .. } => {
                    let report = run_eval(&engine, &cases, &settings, scorer.as_ref()).map_err(|e| e.to_string())?;
                    let _ = writeln!(
                        err,
                        "matching {:.1}% ({}/{}) at k={} rag={}",
                        report.aggregate.matching_pct,
                        report.aggregate.correct_count,
                        report.aggregate.case_count,
                        settings.k,
                        settings.rag_enabled
                    );
                    format!("{}\n", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?)
                }
                EvalCommand::Sweep { .. } => {
                    let rows = k_sweep(&engine, &cases, &ks, &settings, scorer.as_ref()).map_err(|e| e.to_string())?;
                    sweep_csv(&rows)
                }
            };
            emit(&text, common.out.as_deref(), out)?;
            Ok(0)
        }
    }
}

fn run_server(cfg: ServerConfig, err: &mut dyn Write) -> Result<i32, String> {
    let state = Arc::new(build_state(&cfg, LogSink::Stderr).map_err(|e| e.to_string())?);
    let app = router(state, &cfg.cors_origins);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let drained = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&cfg.bind).await.map_err(|e| format!("bind {}: {e}", cfg.bind))?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        let _ = writeln!(err, "listening on http://{addr}");
        serve(listener, app, shutdown_signal(), cfg.shutdown_grace()).await.map_err(|e| e.to_string())
    })?;
    if !drained {
        let _ = writeln!(err, "shutdown grace period elapsed; in-flight requests were dropped");
    }
    Ok(0)
}
