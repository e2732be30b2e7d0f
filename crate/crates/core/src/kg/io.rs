//! Versioned JSON export/import.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AttributeEdge, CooccurrenceEdge, EvidenceRef, KgError, KgNode, KnowledgeGraph, SemanticEdge};
use crate::ner::EntityCategory;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    schema_version: String,
    nodes: Vec<KgNode>,
    cooccurrence: Vec<CooccurrenceEdge>,
    semantic: Vec<SemanticRecord>,
    attributes: Vec<AttributeRecord>,
    total_sentences: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SemanticRecord {
    subject: String,
    object: String,
    descriptor: String,
    count: u64,
    evidence: Vec<EvidenceRef>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeRecord {
    drug: String,
    attribute_category: EntityCategory,
    value: String,
    count: u64,
    evidence: Vec<EvidenceRef>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<serde_json::Value>,
}

/// Serializes the graph to its JSON export form (pretty, stable ordering).
pub fn export_graph(graph: &KnowledgeGraph) -> String {
    let file = GraphFile {
        schema_version: SCHEMA_VERSION.to_string(),
        nodes: graph.nodes().cloned().collect(),
        cooccurrence: graph.cooccurrence_edges().collect(),
        semantic: graph
            .semantic_edges()
            .map(|e| SemanticRecord {
                subject: e.subject.clone(),
                object: e.object.clone(),
                descriptor: e.descriptor.clone(),
                count: e.count,
                evidence: e.evidence.to_vec(),
            })
            .collect(),
        attributes: graph
            .attribute_edges()
            .map(|e| AttributeRecord {
                drug: e.drug.clone(),
                attribute_category: e.attribute_category,
                value: e.value.clone(),
                count: e.count,
                evidence: e.evidence.to_vec(),
            })
            .collect(),
        total_sentences: graph.total_sentences(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("graph serializes");
    out.push('\n');
    out
}

fn parse_error(e: serde_json::Error) -> KgError {
    KgError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses an exported graph, checking the schema version first.
pub fn import_graph(json: &str) -> Result<KnowledgeGraph, KgError> {
    let probe: VersionProbe = serde_json::from_str(json).map_err(parse_error)?;
    let found = match probe.schema_version {
        Some(serde_json::Value::String(s)) => s,
        Some(other) => other.to_string(),
        None => "<missing>".to_string(),
    };
    if found != SCHEMA_VERSION {
        return Err(KgError::Version {
            found,
            expected: SCHEMA_VERSION.to_string(),
        });
    }
    let file: GraphFile = serde_json::from_str(json).map_err(parse_error)?;
    KnowledgeGraph::from_parts(
        file.nodes,
        file.cooccurrence,
        file.semantic
            .into_iter()
            .map(|r| SemanticEdge {
                subject: r.subject,
                object: r.object,
                descriptor: r.descriptor,
                count: r.count,
                evidence: r.evidence.into_iter().collect(),
            })
            .collect(),
        file.attributes
            .into_iter()
            .map(|r| AttributeEdge {
                drug: r.drug,
                attribute_category: r.attribute_category,
                value: r.value,
                count: r.count,
                evidence: r.evidence.into_iter().collect(),
            })
            .collect(),
        file.total_sentences,
    )
}

pub fn write_graph(graph: &KnowledgeGraph, path: impl AsRef<Path>) -> Result<(), KgError> {
    let path = path.as_ref();
    std::fs::write(path, export_graph(graph)).map_err(|source| KgError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<KnowledgeGraph, KgError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| KgError::Io {
        path: path.display().to_string(),
        source,
    })?;
    import_graph(&text)
}
