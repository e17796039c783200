//! `speejis` command-line tool.
//!
//! Exit codes: 0 success, 2 input error, 3 augmentation failed, 1 anything
//! else. Errors are written to stderr as one JSON object per line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use speejis_core::backend::{DEFAULT_RETRY_COUNT, DEFAULT_TIMEOUT_S};
use speejis_core::{
    content_hash, decode_wav, encode_wav, render_svg, AugmentationDescriptor, BackendConfig, BackendKind, EmojiTable,
    HttpTranscriber, Pipeline, PipelineConfig, RenderOptions, Transcriber,
};
use speejis_service::{Service, ServiceConfig, ServiceError, DRAIN_TIMEOUT};

mod failure;

use failure::Failure;

#[derive(Parser)]
#[command(name = "speejis", version, about = "Speech-emotion cues for voice messages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Augment a WAV file and write its descriptor JSON.
    Analyze(AnalyzeArgs),
    /// Render a descriptor as an SVG waveform with emojis.
    Render(RenderArgs),
    /// Validate an emoji table (the built-in one when no path is given).
    TableCheck { path: Option<PathBuf> },
    /// Run the HTTP + WebSocket service.
    Serve(ServeArgs),
}

#[derive(Args)]
struct BackendArgs {
    /// Emotion backend.
    #[arg(long, env = "SPEEJI_SER_BACKEND", default_value = "baseline")]
    backend: BackendKind,
    /// Base URL of the external emotion service.
    #[arg(long, env = "SPEEJI_SER_URL")]
    ser_url: Option<String>,
    /// Base URL of the transcription service.
    #[arg(long, env = "SPEEJI_ASR_URL")]
    asr_url: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TIMEOUT_S)]
    timeout_s: f64,
    #[arg(long, default_value_t = DEFAULT_RETRY_COUNT)]
    retries: u32,
}

impl BackendArgs {
    fn ser_config(&self) -> BackendConfig {
        BackendConfig {
            kind: self.backend,
            endpoint_url: self.ser_url.clone(),
            timeout_s: self.timeout_s,
            retry_count: self.retries,
        }
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Emoji table JSON file.
    #[arg(long, env = "SPEEJI_EMOJI_TABLE")]
    table: Option<PathBuf>,
    #[arg(long, default_value_t = speejis_core::audio::DEFAULT_CHUNK_S)]
    chunk_s: f64,
    #[arg(long, env = "SPEEJI_NEUTRAL_TAU", default_value_t = speejis_core::emotion::DEFAULT_NEUTRAL_TAU)]
    neutral_tau: f64,
    #[arg(long, env = "SPEEJI_INTEREST_TAU", default_value_t = speejis_core::emotion::DEFAULT_INTEREST_TAU)]
    interest_tau: f64,
}

impl EngineArgs {
    fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            chunk_s: self.chunk_s,
            neutral_tau: self.neutral_tau,
            interest_tau: self.interest_tau,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the SHA-256 of the canonical audio.
    #[arg(long)]
    message_id: Option<String>,
}

#[derive(Args)]
struct RenderArgs {
    descriptor: PathBuf,
    #[arg(long, default_value_t = speejis_service::DEFAULT_SVG_WIDTH)]
    width: f64,
    #[arg(long, default_value_t = speejis_service::DEFAULT_SVG_HEIGHT)]
    height: f64,
    /// Draw interest-segment emojis (1) or not (0).
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    segments: u8,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "SPEEJI_DATA_DIR", default_value = "speejis-data")]
    data_dir: PathBuf,
    #[arg(long, env = "SPEEJI_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = speejis_service::DEFAULT_WORKERS)]
    workers: usize,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    engine: EngineArgs,
}

#[tokio::main]
async fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_log = if matches!(cli.command, Command::Serve(_)) {
        "info"
    } else {
        "off"
    };
    tracing_subscriber::fmt()
        .with_writer(io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| default_log.into()))
        .init();

    let result = match cli.command {
        Command::Analyze(a) => analyze(a).await,
        Command::Render(a) => render(a),
        Command::TableCheck { path } => table_check(path.as_deref()),
        Command::Serve(a) => serve(a).await,
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            f.report();
            ExitCode::from(f.code)
        }
    }
}

fn load_table(path: Option<&Path>) -> Result<EmojiTable, Failure> {
    match path {
        Some(p) => EmojiTable::load(p).map_err(|e| Failure::from(e).at_file(p)),
        None => Ok(EmojiTable::builtin()),
    }
}

async fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let bytes = fs::read(&a.input).map_err(|e| Failure::input("io", format!("{}: {e}", a.input.display())))?;
    let clip = decode_wav(&bytes).map_err(|e| Failure::from(e).at_file(&a.input))?;
    let table = load_table(a.engine.table.as_deref())?;
    let ser_cfg = a.backend.ser_config();
    ser_cfg.validate()?;
    let asr = match &a.backend.asr_url {
        Some(url) => {
            let cfg = BackendConfig {
                kind: BackendKind::External,
                endpoint_url: Some(url.clone()),
                ..ser_cfg.clone()
            };
            Some(Arc::new(HttpTranscriber::new(&cfg)?) as Arc<dyn Transcriber>)
        }
        None => None,
    };
    let pipeline = Pipeline::new(Arc::new(table), a.engine.pipeline_config(), ser_cfg.build_ser()?, asr)?;

    let id = a.message_id.unwrap_or_else(|| content_hash(&encode_wav(&clip)));
    let d = pipeline.augment(&id, &clip).await;
    write_output(a.out.as_deref(), d.to_pretty_json().as_bytes())?;
    if d.is_done() {
        Ok(())
    } else {
        Err(Failure::new(
            3,
            "augmentation_failed",
            "emotion backend failed; descriptor has no emojis",
        ))
    }
}

fn render(a: RenderArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.descriptor)
        .map_err(|e| Failure::input("io", format!("{}: {e}", a.descriptor.display())))?;
    let d = AugmentationDescriptor::from_json(&text).map_err(|e| Failure::from(e).at_file(&a.descriptor))?;
    let svg = render_svg(
        &d,
        a.width,
        a.height,
        RenderOptions {
            segments: a.segments == 1,
        },
    )?;
    write_output(a.out.as_deref(), svg.as_bytes())
}

fn table_check(path: Option<&Path>) -> Result<(), Failure> {
    let table = load_table(path)?;
    let (v0, v1, a0, a1) = table.bounding_box();
    println!("{} entries", table.len());
    println!("valence [{v0:.3}, {v1:.3}]");
    println!("arousal [{a0:.3}, {a1:.3}]");
    println!("source: {}", table.source());
    Ok(())
}

async fn serve(a: ServeArgs) -> Result<(), Failure> {
    let cfg = ServiceConfig {
        ser: a.backend.ser_config(),
        asr_url: a.backend.asr_url.clone(),
        table: a.engine.table.clone(),
        pipeline: a.engine.pipeline_config(),
        workers: a.workers,
        ..ServiceConfig::new(&a.data_dir)
    };
    let service = Service::open(&cfg).map_err(|e| match e {
        ServiceError::Core(e) => Failure::from(e),
        other => Failure::new(1, "startup", other.to_string()),
    })?;
    let (listener, addr) = speejis_service::bind(&a.host, a.port)
        .await
        .map_err(|e| Failure::new(1, "bind", e.to_string()))?;
    println!("listening on http://{addr}");
    let _ = io::stdout().flush();
    service
        .run(listener, terminated(), DRAIN_TIMEOUT)
        .await
        .map_err(|e| Failure::new(1, "serve", e.to_string()))
}

async fn terminated() {
    let ctrl_c = tokio::signal::ctrl_c();
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = term.recv() => {}
                    _ = ctrl_c => {}
                }
            }
            Err(_) => {
                let _ = ctrl_c.await;
            }
        }
    }
    #[cfg(not(unix))]
    {
        let _ = ctrl_c.await;
    }
}

/// Writes to `path` via a sibling temp file and rename, or to stdout.
fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let io_err = |e: io::Error| Failure::new(1, "io", e.to_string());
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        return out.write_all(bytes).and_then(|()| out.flush()).map_err(io_err);
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
