use std::fmt::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Subcommand};

use medchat_core::kg::read_graph;
use medchat_core::ner::EntityCategory;
use medchat_service::ServiceConfig;

use crate::{output, parse_category};

#[derive(Args)]
pub struct QueryArgs {
    /// Graph file; defaults to `graph_path` from the config.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Print the same JSON as the HTTP graph endpoints.
    #[arg(long)]
    json: bool,
    #[command(subcommand)]
    query: Query,
}

#[derive(Subcommand)]
enum Query {
    /// Nodes co-occurring with NODE, ranked by P(neighbor | NODE).
    Neighbors {
        node: String,
        #[arg(short, long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, value_parser = parse_category)]
        category: Option<EntityCategory>,
    },
    /// Values of a drug attribute (DOSAGE, DURATION, ...) seen in the corpus.
    Attribute {
        drug: String,
        #[arg(value_parser = parse_category)]
        category: EntityCategory,
    },
}

pub fn run(args: QueryArgs, config: impl FnOnce() -> anyhow::Result<ServiceConfig>) -> anyhow::Result<()> {
    let path = match args.graph {
        Some(p) => p,
        None => config()?
            .graph_path
            .context("no graph file: pass --graph or set graph_path")?,
    };
    output::require_exists(&path, "graph file")?;
    let graph = read_graph(&path)?;
    let mut text = String::new();
    match args.query {
        Query::Neighbors { node, k, category } => {
            let found = graph.neighbors(node.trim(), k as usize, category)?;
            if args.json {
                text = output::json(&found);
            } else {
                for n in found {
                    writeln!(text, "{} {}", n.lemma_key, n.probability)?;
                }
            }
        }
        Query::Attribute { drug, category } => {
            let found = graph.query_attribute(drug.trim(), category)?;
            if args.json {
                text = output::json(&found);
            } else {
                for v in found {
                    writeln!(text, "{} (count {})", v.value, v.count)?;
                }
            }
        }
    }
    output::emit(&text, None)
}
