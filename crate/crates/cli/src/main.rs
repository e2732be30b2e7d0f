//! `medchat`: corpus ingestion, analytics, graph queries, the chat server
//! and a terminal chat client.
//!
//! Exit codes: 0 success, 1 operational error, 2 usage error.

mod analyze;
mod chat;
mod ingest;
mod output;
mod query;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use medchat_core::corpus::{load_corpus, CorpusFormat, LoadedCorpus};
use medchat_core::ner::{load_gazetteer, EntityCategory, Gazetteer};
use medchat_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "medchat", version, about = "Medical literature knowledge graph and patient chatbot")]
struct Cli {
    /// Service config file (TOML); MEDCHAT_* variables override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a knowledge graph file from a corpus.
    Ingest(ingest::IngestArgs),
    /// Corpus statistics as CSV or JSON.
    Analyze(analyze::AnalyzeArgs),
    /// Search a graph file.
    Query(query::QueryArgs),
    /// Run the HTTP service.
    Serve,
    /// Chat with a running service from the terminal.
    Chat(chat::ChatArgs),
}

/// Corpus location shared by `ingest` and `analyze`.
#[derive(Args, Clone)]
struct CorpusArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "jsonl", value_parser = ["jsonl", "metadata-csv+json-dir"])]
    format: String,
    /// Gazetteer CSV (`term,category[,canonical]`); the bundled one by default.
    #[arg(long)]
    gazetteer: Option<PathBuf>,
}

impl CorpusArgs {
    fn check_paths(&self) -> anyhow::Result<()> {
        output::require_exists(&self.corpus, "corpus")?;
        if let Some(g) = &self.gazetteer {
            output::require_exists(g, "gazetteer")?;
        }
        Ok(())
    }

    fn load(&self) -> anyhow::Result<(LoadedCorpus, Gazetteer)> {
        self.check_paths()?;
        let gazetteer = match &self.gazetteer {
            Some(p) => load_gazetteer(p)?,
            None => Gazetteer::bundled(),
        };
        let format: CorpusFormat = self.format.parse()?;
        Ok((load_corpus(&self.corpus, format)?, gazetteer))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Csv,
    Json,
}

fn parse_category(s: &str) -> Result<EntityCategory, String> {
    s.parse().map_err(|e: medchat_core::ner::UnknownCategory| e.to_string())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = || -> anyhow::Result<ServiceConfig> { Ok(ServiceConfig::load(cli.config.as_deref())?) };
    match cli.command {
        Command::Ingest(args) => ingest::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Query(args) => query::run(args, config),
        Command::Serve => serve::run(config()?),
        Command::Chat(args) => chat::run(args, config()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("MEDCHAT_LOG").unwrap_or_else(|_| "warn".into()),
        )
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
