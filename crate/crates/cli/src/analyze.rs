use std::path::PathBuf;

use clap::{Args, Subcommand};

use medchat_core::analysis::{monthly_trend, symptom_document_counts, title_word_frequencies};
use medchat_core::corpus::TextPipeline;

use crate::{output, CorpusArgs, Emit};

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    table: Table,
}

#[derive(Subcommand)]
enum Table {
    /// Documents mentioning each symptom, most frequent first.
    TopSymptoms {
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Monthly count of documents mentioning a term.
    Trend {
        #[arg(long)]
        term: String,
    },
    /// Most frequent title words.
    TitleWords {
        #[arg(long, default_value_t = 20)]
        top: usize,
    },
}

pub fn run(args: AnalyzeArgs) -> anyhow::Result<()> {
    let (loaded, gazetteer) = args.corpus.load()?;
    let docs = loaded.documents;
    let pipeline = TextPipeline::default();
    let text = match args.table {
        Table::TopSymptoms { top } => {
            let table = symptom_document_counts(&docs, &gazetteer, &pipeline).truncate(top);
            match args.emit {
                Emit::Csv => table.to_csv(),
                Emit::Json => output::json(&table),
            }
        }
        Table::TitleWords { top } => {
            let table = title_word_frequencies(&docs, top, &pipeline);
            match args.emit {
                Emit::Csv => table.to_csv(),
                Emit::Json => output::json(&table),
            }
        }
        Table::Trend { term } => {
            anyhow::ensure!(!term.trim().is_empty(), "--term must not be empty");
            let series = monthly_trend(&docs, &term, &pipeline);
            match args.emit {
                Emit::Csv => series.to_csv(),
                Emit::Json => output::json(&series),
            }
        }
    };
    output::emit(&text, args.out.as_ref())
}
