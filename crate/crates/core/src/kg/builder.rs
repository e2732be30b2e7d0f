use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{extract_semantic_edges, EvidenceRef, KnowledgeGraph, RelationPatterns};
use crate::corpus::{Document, Sentence, TextPipeline};
use crate::ner::EntityExtractor;

/// Counts reported after a build.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub documents: usize,
    pub sentences: usize,
    pub entities: usize,
    pub nodes: usize,
    pub cooccurrence_edges: usize,
    pub semantic_edges: usize,
    pub attribute_edges: usize,
}

/// Runs corpus → NER → graph. Documents are processed in parallel into
/// partial graphs which are then merged.
pub struct GraphBuilder<'a> {
    pipeline: &'a TextPipeline,
    extractor: &'a dyn EntityExtractor,
    relations: &'a RelationPatterns,
}

impl<'a> GraphBuilder<'a> {
    pub fn new(
        pipeline: &'a TextPipeline,
        extractor: &'a dyn EntityExtractor,
        relations: &'a RelationPatterns,
    ) -> Self {
        GraphBuilder {
            pipeline,
            extractor,
            relations,
        }
    }

    /// Adds one prepared sentence to `graph`; returns the number of entities.
    pub fn ingest_sentence(&self, graph: &mut KnowledgeGraph, sentence: &Sentence) -> usize {
        let entities = self.extractor.extract(sentence);
        graph.add_sentence(sentence, &entities);
        for edge in extract_semantic_edges(sentence, &entities, self.relations) {
            graph.add_semantic_edge(edge);
        }
        entities.len()
    }

    pub fn build(&self, docs: &[Document]) -> (KnowledgeGraph, BuildReport) {
        let (graph, sentences, entities) = docs
            .par_iter()
            .map(|doc| {
                let mut graph = KnowledgeGraph::new();
                let sentences = self.pipeline.sentences(doc);
                let entities: usize = sentences
                    .iter()
                    .map(|s| self.ingest_sentence(&mut graph, s))
                    .sum();
                (graph, sentences.len(), entities)
            })
            .reduce(
                || (KnowledgeGraph::new(), 0, 0),
                |(a, sa, ea), (b, sb, eb)| (a.merged(b), sa + sb, ea + eb),
            );
        let report = BuildReport {
            documents: docs.len(),
            sentences,
            entities,
            nodes: graph.node_count(),
            cooccurrence_edges: graph.cooccurrence_count(),
            semantic_edges: graph.semantic_edges().count(),
            attribute_edges: graph.attribute_edges().count(),
        };
        (graph, report)
    }
}

/// Resolves evidence references back to sentence text.
#[derive(Debug, Clone, Default)]
pub struct SentenceIndex {
    sentences: HashMap<EvidenceRef, String>,
}

impl SentenceIndex {
    pub fn from_documents(docs: &[Document], pipeline: &TextPipeline) -> Self {
        let sentences = docs
            .iter()
            .flat_map(|d| pipeline.sentences(d))
            .map(|s| (EvidenceRef::of(&s), s.text))
            .collect();
        SentenceIndex { sentences }
    }

    pub fn get(&self, r: &EvidenceRef) -> Option<&str> {
        self.sentences.get(r).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}
