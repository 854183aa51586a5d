//! `hue-rank`: index an image directory, query it, tabulate rank matrices
//! and serve the JSON API.
//!
//! Exit codes: 0 on success, 1 for user errors (bad flags, paths, names,
//! feature files), 2 for internal failures.

use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use hue_rank_core::index::{build_index_with, IndexEvent};
use hue_rank_core::query::QueryImage;
use hue_rank_core::{
    evaluate, execute, ChannelSet, IndexOptions, Method, QuerySpec, RankColumn, RankedList, Scope,
};
use hue_rank_service::{ServeConfig, ServeError};
use serde::Serialize;
use tracing_subscriber::EnvFilter;

const LOG_ENV: &str = "HUE_RANK_LOG";

#[derive(Debug, Parser)]
#[command(name = "hue-rank", version, about = "Query-by-example image retrieval on color statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract features for every image in a directory and write the feature file.
    Index {
        /// Directory holding JPEG, PNG or BMP files.
        dir: PathBuf,
        /// Output feature file (CSV).
        #[arg(long, short)]
        out: PathBuf,
        /// Descend into subdirectories.
        #[arg(long)]
        recursive: bool,
        /// Skip the threshold-group report after indexing.
        #[arg(long, alias = "no-group")]
        no_group_check: bool,
    },
    /// Rank indexed images against a query image.
    Query {
        /// Feature file produced by `index`.
        #[arg(long)]
        index: PathBuf,
        /// An indexed image name, or a path to an image outside the index.
        #[arg(long)]
        query: String,
        /// Retrieval method: pm1 (one mean), pm2 (two means), pm3 (three
        /// means), pm4 (three medians), pm5 (standard deviations).
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Channel letters, e.g. `r`, `gb`, `rgb`.
        #[arg(long, value_parser = parse_channels)]
        channels: ChannelSet,
        /// Difference factor: inclusive bound on the score.
        #[arg(long)]
        df: f64,
        #[arg(long, value_parser = parse_scope, default_value = "group")]
        scope: Scope,
        /// Number of results to print.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
        top: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Print the rank matrix of a set of images under every method column.
    Evaluate {
        #[arg(long)]
        index: PathBuf,
        /// Comma-separated image names (default: all, in name order).
        #[arg(long, value_delimiter = ',')]
        subset: Vec<String>,
        /// Write the CSV here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the JSON API.
    Serve {
        #[arg(long)]
        index: PathBuf,
        /// Directory the index was built from; used for thumbnails.
        #[arg(long)]
        images: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Static files served at `/`.
        #[arg(long)]
        webroot: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: hue_rank_core::Error| e.to_string())
}

fn parse_channels(s: &str) -> Result<ChannelSet, String> {
    s.parse().map_err(|e: hue_rank_core::Error| e.to_string())
}

fn parse_scope(s: &str) -> Result<Scope, String> {
    s.parse().map_err(|e: hue_rank_core::Error| e.to_string())
}

/// Raised for problems the user can fix; maps to exit code 1.
#[derive(Debug)]
struct UserError(String);

impl std::fmt::Display for UserError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UserError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_env(LOG_ENV).unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(io::stderr)
        .with_target(false)
        .init();

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UserError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<hue_rank_core::Error>() {
            return if e.is_user_error() { 1 } else { 2 };
        }
        if let Some(e) = cause.downcast_ref::<ServeError>() {
            return match e {
                ServeError::Io(_) => 2,
                ServeError::Index(inner) if !inner.is_user_error() => 2,
                _ => 1,
            };
        }
    }
    2
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Index {
            dir,
            out,
            recursive,
            no_group_check,
        } => cmd_index(&dir, &out, recursive, no_group_check),
        Command::Query {
            index,
            query,
            method,
            channels,
            df,
            scope,
            top,
            format,
        } => {
            let spec = QuerySpec::new(method, channels, df, scope)?;
            cmd_query(&index, &query, &spec, top as usize, format)
        }
        Command::Evaluate { index, subset, out } => cmd_evaluate(&index, &subset, out.as_deref()),
        Command::Serve {
            index,
            images,
            port,
            host,
            webroot,
        } => {
            let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
            runtime.block_on(hue_rank_service::serve(ServeConfig {
                index,
                images,
                addr: SocketAddr::new(host, port),
                webroot,
            }))?;
            Ok(())
        }
    }
}

fn cmd_index(dir: &Path, out: &Path, recursive: bool, no_group_check: bool) -> anyhow::Result<()> {
    let done = AtomicUsize::new(0);
    let report = build_index_with(dir, &IndexOptions { recursive }, |event| {
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        match event {
            IndexEvent::Indexed(fv) => {
                tracing::info!("[{n}] {} {}x{}", fv.name, fv.width, fv.height)
            }
            IndexEvent::Skipped(s) => tracing::warn!("[{n}] skipped: {}", s.error),
        }
    })?;
    hue_rank_core::save(&report.store, out)?;

    let store = &report.store;
    println!(
        "indexed: {}, skipped: {}, groups: {} -> {}",
        store.len(),
        report.skipped.len(),
        store.group_count(),
        out.display()
    );
    if !no_group_check {
        for g in store.groups() {
            println!("  group {:>10}: {} image(s)", g.key, g.members.len());
        }
        if store.len() > 1 && store.group_count() == store.len() {
            tracing::warn!(
                "every threshold group holds a single image; use `--scope corpus` to search across sizes"
            );
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct Row<'a> {
    rank: usize,
    name: &'a str,
    score: f64,
}

fn resolve_query(store: &hue_rank_core::IndexStore, query: &str) -> anyhow::Result<QueryImage> {
    if store.get(query).is_some() {
        return Ok(QueryImage::Indexed(query.to_string()));
    }
    let path = Path::new(query);
    if path.is_file() {
        Ok(QueryImage::External(path.to_path_buf()))
    } else {
        Err(hue_rank_core::Error::UnknownImage(query.to_string()).into())
    }
}

fn cmd_query(index: &Path, query: &str, spec: &QuerySpec, top: usize, format: Format) -> anyhow::Result<()> {
    let store = hue_rank_core::load(index)?;
    let target = resolve_query(&store, query)?;
    let mut list = execute(&store, &target, spec)?;
    list.truncate(top);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    write_ranked(&mut out, &list, format)?;
    Ok(())
}

fn write_ranked(out: &mut impl Write, list: &RankedList, format: Format) -> io::Result<()> {
    let rows: Vec<Row> = list
        .results
        .iter()
        .map(|r| Row {
            rank: r.rank,
            name: &r.name,
            score: r.score,
        })
        .collect();
    match format {
        Format::Table => {
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
            writeln!(out, "{:>4}  {:<width$}  score", "rank", "name")?;
            for r in &rows {
                writeln!(out, "{:>4}  {:<width$}  {:.6}", r.rank, r.name, r.score)?;
            }
        }
        Format::Csv => {
            writeln!(out, "rank,name,score")?;
            for r in &rows {
                writeln!(out, "{},{},{:.6}", r.rank, r.name, r.score)?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn cmd_evaluate(index: &Path, subset: &[String], out: Option<&Path>) -> anyhow::Result<()> {
    let store = hue_rank_core::load(index)?;
    let names: Vec<String> = if subset.is_empty() {
        store.names().map(String::from).collect()
    } else {
        subset.iter().map(|s| s.trim().to_string()).collect()
    };
    if names.is_empty() {
        return Err(UserError("no images to evaluate".into()).into());
    }
    let matrix = evaluate(&store, &names, &RankColumn::standard_set())?;
    let csv = matrix.to_csv_string();
    match out {
        Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(csv.as_bytes())?,
    }
    Ok(())
}
