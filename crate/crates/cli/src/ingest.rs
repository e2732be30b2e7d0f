use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::Serialize;

use medchat_core::corpus::{filter_covid_docs, SkippedRecord, TextPipeline};
use medchat_core::kg::{write_graph, BuildReport, GraphBuilder, RelationPatterns};

use crate::{output, CorpusArgs};

#[derive(Args)]
pub struct IngestArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Graph file to write.
    #[arg(long)]
    out: PathBuf,
    /// Keep only documents mentioning COVID-19 or SARS-CoV-2.
    #[arg(long)]
    covid_only: bool,
}

#[derive(Serialize)]
struct IngestReport {
    documents_loaded: usize,
    documents_skipped: Vec<SkippedRecord>,
    covid_only: bool,
    #[serde(flatten)]
    build: BuildReport,
    graph: String,
}

pub fn run(args: IngestArgs) -> anyhow::Result<()> {
    let (loaded, gazetteer) = args.corpus.load()?;
    let docs = if args.covid_only {
        filter_covid_docs(&loaded.documents)
    } else {
        loaded.documents
    };
    let pipeline = TextPipeline::default();
    let relations = RelationPatterns::bundled();
    let (graph, build) = GraphBuilder::new(&pipeline, &gazetteer, &relations).build(&docs);
    write_graph(&graph, &args.out).with_context(|| format!("cannot write graph {}", args.out.display()))?;
    let report = IngestReport {
        documents_loaded: loaded.report.loaded,
        documents_skipped: loaded.report.skipped,
        covid_only: args.covid_only,
        build,
        graph: args.out.display().to_string(),
    };
    output::emit(&output::json(&report), None)
}
