//! Subcommand implementations.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 analysis infeasible
//! (for example a decade without enough songs for an era baseline).

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use eralign_core::{
    run_pipeline, to_canonical_json, Alignment, AnalysisBundle, AnalysisConfig, AnalysisWindow,
    PipelineError,
};

use crate::service::{router, ServiceOptions};

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(name = "eralign", version, about = "Artist-versus-era stylistic alignment analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest chart and feature CSVs and write an analysis bundle.
    Build(BuildArgs),
    /// Print the profile table, median boundary and correlation of a bundle.
    Stats(StatsArgs),
    /// Serve a bundle over the read-only JSON API.
    Serve(ServeArgs),
    /// Export a bundle's profiles as CSV or JSON.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Weekly chart CSV (`week,rank,artist,song`).
    #[arg(long)]
    pub charts: PathBuf,
    /// Audio feature CSV (`artist,song,valence,energy,danceability,acousticness,liveness`).
    #[arg(long)]
    pub features: PathBuf,
    /// Output bundle path.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of top-ranked artists to profile.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
    pub top: u32,
    /// Minimum songs an artist needs in a decade to get a profile there.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub min_songs_per_decade: u32,
    /// First chart week accepted (inclusive).
    #[arg(long, default_value = "1960-01-01")]
    pub window_start: NaiveDate,
    /// Last chart week accepted (inclusive).
    #[arg(long, default_value = "2019-12-31")]
    pub window_end: NaiveDate,
    /// Zero the creation timestamp so identical inputs give identical bytes.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Bundle produced by `build`.
    #[arg(long)]
    pub bundle: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    /// TCP port to listen on (0 picks a free port).
    #[arg(long, default_value_t = 8080)]
    pub port: u32,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Also serve a built web UI from this directory.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Disable the permissive CORS policy.
    #[arg(long)]
    pub no_cors: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long, value_enum)]
    pub format: ExportFormat,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Build(args) => cmd_build(&args, stdout),
        Command::Stats(args) => cmd_stats(&args, stdout),
        Command::Serve(args) => cmd_serve(&args),
        Command::Export(args) => cmd_export(&args, stdout),
    }
}

fn open(path: &Path, what: &str) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::input(format!("cannot read {what} file {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn load_bundle(path: &Path) -> Result<AnalysisBundle, CliError> {
    AnalysisBundle::load(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".to_string())
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.window_start > args.window_end {
        return Err(CliError::input("--window-start is after --window-end"));
    }
    let config = AnalysisConfig {
        top_k: args.top as usize,
        window: AnalysisWindow {
            start: args.window_start,
            end: args.window_end,
        },
        min_songs_per_decade: args.min_songs_per_decade as usize,
        created_at: if args.deterministic {
            DateTime::<Utc>::UNIX_EPOCH
        } else {
            Utc::now()
        },
    };

    let charts = open(&args.charts, "charts")?;
    let features = open(&args.features, "features")?;
    let bundle = run_pipeline(charts, features, &config).map_err(|e| match e {
        PipelineError::Charts(inner) => CliError::input(format!("{}: {inner}", args.charts.display())),
        PipelineError::Features(inner) => {
            CliError::input(format!("{}: {inner}", args.features.display()))
        }
        PipelineError::Analysis(inner) => CliError::infeasible(inner.to_string()),
    })?;

    write_file(&args.out, &bundle.to_canonical_json())?;

    let io = |e: io::Error| CliError::input(e.to_string());
    writeln!(out, "warnings: {}", bundle.warnings.len()).map_err(io)?;
    let (r, p) = match &bundle.correlation {
        Some(c) => (format!("{:.4}", c.r), format!("{:.4}", c.p_two_sided)),
        None => ("n/a".into(), "n/a".into()),
    };
    writeln!(
        out,
        "artists={} profiles={} median_shape={} r={} p={} -> {}",
        bundle.artists.len(),
        bundle.profiles.len(),
        fmt_opt(bundle.median_shape),
        r,
        p,
        args.out.display()
    )
    .map_err(io)?;
    Ok(())
}

pub fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bundle = load_bundle(&args.bundle)?;
    let io = |e: io::Error| CliError::input(e.to_string());

    let width = bundle
        .profiles
        .iter()
        .map(|p| p.artist.chars().count())
        .max()
        .unwrap_or(6)
        .max(6);
    writeln!(
        out,
        "{:<width$}  {:<6}  {:>9}  {:>9}  quadrant",
        "artist", "decade", "shape", "contrast"
    )
    .map_err(io)?;
    for p in &bundle.profiles {
        let line = match &p.alignment {
            Alignment::Classified(m) => format!(
                "{:<width$}  {:<6}  {:>9.6}  {:>9.6}  {}",
                p.artist, p.decade, m.shape_similarity, m.contrast_ratio, m.quadrant
            ),
            Alignment::Degenerate { reason } => format!(
                "{:<width$}  {:<6}  {:>9}  {:>9}  unclassified ({})",
                p.artist,
                p.decade,
                "-",
                "-",
                reason.describe()
            ),
        };
        writeln!(out, "{line}").map_err(io)?;
    }
    writeln!(out, "median_shape={}", fmt_opt(bundle.median_shape)).map_err(io)?;
    match &bundle.correlation {
        Some(c) => writeln!(out, "r={:.6}, p={:.6}, n={}", c.r, c.p_two_sided, c.n),
        None => writeln!(out, "r=n/a, p=n/a, n={} (correlation skipped)", bundle.classified_profiles().count()),
    }
    .map_err(io)?;
    Ok(())
}

const EXPORT_CSV_HEADER: &str =
    "artist,decade,appearances,distinct_songs,performance_score,shape,contrast,quadrant";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn profiles_csv(bundle: &AnalysisBundle) -> String {
    let mut text = String::from(EXPORT_CSV_HEADER);
    text.push('\n');
    for p in &bundle.profiles {
        let (shape, contrast, quadrant) = match &p.alignment {
            Alignment::Classified(m) => (
                m.shape_similarity.to_string(),
                m.contrast_ratio.to_string(),
                m.quadrant.to_string(),
            ),
            Alignment::Degenerate { .. } => (String::new(), String::new(), "unclassified".to_string()),
        };
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            csv_field(&p.artist),
            p.decade,
            p.appearances,
            p.distinct_songs,
            p.performance_score,
            shape,
            contrast,
            quadrant
        ));
    }
    text
}

pub fn cmd_export(args: &ExportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bundle = load_bundle(&args.bundle)?;
    let text = match args.format {
        ExportFormat::Csv => profiles_csv(&bundle),
        ExportFormat::Json => {
            to_canonical_json(&bundle.profiles).map_err(|e| CliError::input(e.to_string()))?
        }
    };
    write_file(&args.out, &text)?;
    writeln!(
        out,
        "exported {} profiles to {}",
        bundle.profiles.len(),
        args.out.display()
    )
    .map_err(|e| CliError::input(e.to_string()))?;
    Ok(())
}

pub fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let port = u16::try_from(args.port)
        .map_err(|_| CliError::input(format!("invalid port {} (must be 0..=65535)", args.port)))?;
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            return Err(CliError::input(format!(
                "static directory {} does not exist",
                dir.display()
            )));
        }
    }
    let bundle = Arc::new(load_bundle(&args.bundle)?);
    let options = ServiceOptions {
        static_dir: args.static_dir.clone(),
        cors: !args.no_cors,
    };

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::input(format!("cannot start runtime: {e}")))?;
    runtime.block_on(async move {
        let addr = format!("{}:{port}", args.host);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::input(format!("cannot bind {addr}: {e}")))?;
        let local = listener
            .local_addr()
            .map_err(|e| CliError::input(e.to_string()))?;
        tracing::info!("listening on http://{local}");
        // machine-readable line for scripts that pass --port 0
        eprintln!("listening on http://{local}");
        axum::serve(listener, router(bundle, &options))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
                tracing::info!("shutting down");
            })
            .await
            .map_err(|e| CliError::input(format!("server error: {e}")))
    })
}
