//! Literature knowledge graph.
//!
//! Nodes are entity keys. Three edge sets are kept side by side:
//!
//! * co-occurrence edges: unordered pairs counted once per sentence in which
//!   both keys appear, giving per-sentence conditional probabilities
//!   `P(a | b) = count(a, b) / sentence_count(b)`;
//! * semantic edges: directed, labelled by a relation phrase ("symptom",
//!   "treats") matched between two entities of a sentence;
//! * attribute edges: drug → value observed in the same sentence
//!   (DURATION "5 days", STRENGTH "500 mg", ...).
//!
//! All maps are ordered, so the same multiset of sentences always yields the
//! same graph and the same export bytes.

mod builder;
mod io;
mod semantic;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::ner::{Entity, EntityCategory};

pub use builder::{BuildReport, GraphBuilder, SentenceIndex};
pub use io::{export_graph, import_graph, read_graph, write_graph, SCHEMA_VERSION};
pub use semantic::{extract_semantic_edges, Direction, RelationPattern, RelationPatterns};

/// Maximum evidence references kept per edge.
pub const EVIDENCE_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EvidenceRef {
    pub doc_id: String,
    pub sentence_index: usize,
}

impl EvidenceRef {
    pub fn of(sentence: &Sentence) -> Self {
        EvidenceRef {
            doc_id: sentence.doc_id.clone(),
            sentence_index: sentence.index,
        }
    }
}

/// Keeps the smallest [`EVIDENCE_CAP`] references, so the kept set does not
/// depend on ingestion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence(BTreeSet<EvidenceRef>);

impl Evidence {
    pub fn insert(&mut self, r: EvidenceRef) {
        self.0.insert(r);
        if self.0.len() > EVIDENCE_CAP {
            self.0.pop_last();
        }
    }

    pub fn extend(&mut self, other: &Evidence) {
        for r in &other.0 {
            self.insert(r.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &EvidenceRef> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_vec(&self) -> Vec<EvidenceRef> {
        self.0.iter().cloned().collect()
    }
}

impl FromIterator<EvidenceRef> for Evidence {
    fn from_iter<I: IntoIterator<Item = EvidenceRef>>(iter: I) -> Self {
        let mut e = Evidence::default();
        for r in iter {
            e.insert(r);
        }
        e
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgNode {
    pub lemma_key: String,
    pub category: EntityCategory,
    pub mention_count: u64,
    pub sentence_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceEdge {
    pub a: String,
    pub b: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticEdge {
    pub subject: String,
    pub object: String,
    pub descriptor: String,
    pub count: u64,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeEdge {
    pub drug: String,
    pub attribute_category: EntityCategory,
    pub value: String,
    pub count: u64,
    pub evidence: Evidence,
}

/// One ranked answer of [`KnowledgeGraph::query_attribute`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeValue {
    pub value: String,
    pub count: u64,
    pub evidence: Vec<EvidenceRef>,
}

/// One ranked answer of [`KnowledgeGraph::neighbors`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub lemma_key: String,
    pub category: EntityCategory,
    /// `P(neighbor | node)`.
    pub probability: f64,
    pub count: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown drug {0:?}")]
    UnknownDrug(String),
    #[error("{0} is not a drug attribute category")]
    NotAnAttribute(EntityCategory),
    #[error("P(· | {0:?}) is undefined: the node occurs in no sentence")]
    UndefinedConditional(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("graph file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported graph schema version {found} (expected {expected})")]
    Version { found: String, expected: String },
    #[error("invalid graph: {0}")]
    Invalid(String),
}

type AttributeKey = (String, EntityCategory, String);
type SemanticKey = (String, String, String);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    nodes: BTreeMap<String, KgNode>,
    /// Symmetric adjacency: both `adjacency[a][b]` and `adjacency[b][a]` hold the
    /// pair count.
    adjacency: BTreeMap<String, BTreeMap<String, u64>>,
    semantic: BTreeMap<SemanticKey, SemanticEdge>,
    attributes: BTreeMap<AttributeKey, AttributeEdge>,
    total_sentences: u64,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total_sentences(&self) -> u64 {
        self.total_sentences
    }

    pub fn node(&self, key: &str) -> Option<&KgNode> {
        self.nodes.get(key)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &KgNode> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Co-occurrence edges with `a < b`, sorted.
    pub fn cooccurrence_edges(&self) -> impl Iterator<Item = CooccurrenceEdge> + '_ {
        self.adjacency.iter().flat_map(|(a, row)| {
            row.range::<str, _>((std::ops::Bound::Excluded(a.as_str()), std::ops::Bound::Unbounded))
                .map(move |(b, &count)| CooccurrenceEdge {
                    a: a.clone(),
                    b: b.clone(),
                    count,
                })
        })
    }

    pub fn cooccurrence_count(&self) -> usize {
        self.cooccurrence_edges().count()
    }

    pub fn semantic_edges(&self) -> impl Iterator<Item = &SemanticEdge> {
        self.semantic.values()
    }

    pub fn attribute_edges(&self) -> impl Iterator<Item = &AttributeEdge> {
        self.attributes.values()
    }

    /// Ingests one sentence and the entities extracted from it.
    ///
    /// Every distinct key gains one sentence and its mention count; every
    /// unordered pair of distinct keys gains exactly one co-occurrence,
    /// however often either is repeated. Each attribute mention attaches to
    /// the nearest drug mention of the sentence (earlier drug on ties), counted
    /// once per sentence.
    pub fn add_sentence(&mut self, sentence: &Sentence, entities: &[Entity]) {
        self.total_sentences += 1;

        let mut distinct: BTreeMap<&str, (EntityCategory, u64)> = BTreeMap::new();
        for e in entities {
            let slot = distinct.entry(e.lemma_key.as_str()).or_insert((e.category, 0));
            slot.0 = slot.0.min(e.category);
            slot.1 += 1;
        }
        for (&key, &(category, mentions)) in &distinct {
            let node = self.node_entry(key, category);
            node.mention_count += mentions;
            node.sentence_count += 1;
        }
        let keys: Vec<&str> = distinct.keys().copied().collect();
        for (i, a) in keys.iter().enumerate() {
            for b in &keys[i + 1..] {
                self.bump_pair(a, b, 1);
            }
        }

        let evidence = EvidenceRef::of(sentence);
        let drugs: Vec<&Entity> = entities
            .iter()
            .filter(|e| e.category == EntityCategory::Chemical)
            .collect();
        let mut attached: BTreeSet<AttributeKey> = BTreeSet::new();
        for attr in entities.iter().filter(|e| e.category.is_attribute()) {
            if let Some(drug) = nearest(attr, &drugs) {
                attached.insert((drug.lemma_key.clone(), attr.category, attr.lemma_key.clone()));
            }
        }
        for key in attached {
            let edge = self.attributes.entry(key.clone()).or_insert_with(|| AttributeEdge {
                drug: key.0,
                attribute_category: key.1,
                value: key.2,
                count: 0,
                evidence: Evidence::default(),
            });
            edge.count += 1;
            edge.evidence.insert(evidence.clone());
        }
    }

    /// Adds a semantic edge, summing counts and evidence with any existing
    /// edge of the same (subject, object, descriptor). Endpoints missing from
    /// the graph are ignored.
    pub fn add_semantic_edge(&mut self, edge: SemanticEdge) {
        if !self.nodes.contains_key(&edge.subject) || !self.nodes.contains_key(&edge.object) {
            tracing::debug!(subject = %edge.subject, object = %edge.object, "semantic edge without nodes dropped");
            return;
        }
        let key = (edge.subject.clone(), edge.object.clone(), edge.descriptor.clone());
        match self.semantic.get_mut(&key) {
            Some(existing) => {
                existing.count += edge.count;
                existing.evidence.extend(&edge.evidence);
            }
            None => {
                self.semantic.insert(key, edge);
            }
        }
    }

    /// Co-occurrence count of an unordered pair; 0 when absent or `a == b`.
    pub fn edge_weight(&self, a: &str, b: &str) -> u64 {
        if a == b {
            return 0;
        }
        self.adjacency
            .get(a)
            .and_then(|row| row.get(b))
            .copied()
            .unwrap_or(0)
    }

    /// Exact `P(a | given)` as a ratio of sentence counts.
    pub fn conditional_ratio(&self, a: &str, given: &str) -> Result<Ratio<u64>, KgError> {
        let denominator = self
            .nodes
            .get(given)
            .map(|n| n.sentence_count)
            .filter(|&c| c > 0)
            .ok_or_else(|| KgError::UndefinedConditional(given.to_string()))?;
        let numerator = if a == given {
            denominator
        } else {
            self.edge_weight(a, given)
        };
        Ok(Ratio::new(numerator, denominator))
    }

    /// `P(a | given)` in [0, 1].
    pub fn conditional_probability(&self, a: &str, given: &str) -> Result<f64, KgError> {
        self.conditional_ratio(a, given).map(|r| ratio_to_f64(&r))
    }

    /// Top `k` co-occurring nodes by `P(neighbor | node)`, ties broken by key.
    pub fn neighbors(
        &self,
        node: &str,
        k: usize,
        category_filter: Option<EntityCategory>,
    ) -> Result<Vec<Neighbor>, KgError> {
        let base = self
            .nodes
            .get(node)
            .ok_or_else(|| KgError::UnknownNode(node.to_string()))?;
        let mut ranked: Vec<(&String, u64)> = self
            .adjacency
            .get(node)
            .into_iter()
            .flat_map(|row| row.iter().map(|(k, &c)| (k, c)))
            .filter(|(key, _)| {
                category_filter.is_none_or(|c| self.nodes.get(*key).is_some_and(|n| n.category == c))
            })
            .collect();
        // all candidates share the denominator, so ordering by count is exact
        ranked.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
        Ok(ranked
            .into_iter()
            .take(k)
            .map(|(key, count)| Neighbor {
                lemma_key: key.clone(),
                category: self.nodes[key].category,
                probability: ratio_to_f64(&Ratio::new(count, base.sentence_count)),
                count,
            })
            .collect())
    }

    /// Values observed for a drug attribute, by count descending then value.
    pub fn query_attribute(
        &self,
        drug: &str,
        category: EntityCategory,
    ) -> Result<Vec<AttributeValue>, KgError> {
        if !category.is_attribute() {
            return Err(KgError::NotAnAttribute(category));
        }
        match self.nodes.get(drug) {
            Some(n) if n.category == EntityCategory::Chemical => {}
            _ => return Err(KgError::UnknownDrug(drug.to_string())),
        }
        let mut values: Vec<AttributeValue> = self
            .attributes
            .range((drug.to_string(), category, String::new())..)
            .take_while(|((d, c, _), _)| d == drug && *c == category)
            .map(|(_, e)| AttributeValue {
                value: e.value.clone(),
                count: e.count,
                evidence: e.evidence.to_vec(),
            })
            .collect();
        values.sort_by(|x, y| y.count.cmp(&x.count).then_with(|| x.value.cmp(&y.value)));
        Ok(values)
    }

    /// Adds another graph's counts into this one. Associative and
    /// commutative, so partial graphs built in parallel can be combined in
    /// any order.
    pub fn merge(&mut self, other: &KnowledgeGraph) {
        self.total_sentences += other.total_sentences;
        for n in other.nodes.values() {
            let node = self.node_entry(&n.lemma_key, n.category);
            node.mention_count += n.mention_count;
            node.sentence_count += n.sentence_count;
        }
        for e in other.cooccurrence_edges() {
            self.bump_pair(&e.a, &e.b, e.count);
        }
        for e in other.semantic.values() {
            self.add_semantic_edge(e.clone());
        }
        for (key, e) in &other.attributes {
            match self.attributes.get_mut(key) {
                Some(existing) => {
                    existing.count += e.count;
                    existing.evidence.extend(&e.evidence);
                }
                None => {
                    self.attributes.insert(key.clone(), e.clone());
                }
            }
        }
    }

    pub fn merged(mut self, other: KnowledgeGraph) -> KnowledgeGraph {
        self.merge(&other);
        self
    }

    fn node_entry(&mut self, key: &str, category: EntityCategory) -> &mut KgNode {
        let node = self.nodes.entry(key.to_string()).or_insert_with(|| KgNode {
            lemma_key: key.to_string(),
            category,
            mention_count: 0,
            sentence_count: 0,
        });
        // a key seen under two categories settles on the smaller one
        node.category = node.category.min(category);
        node
    }

    fn bump_pair(&mut self, a: &str, b: &str, by: u64) {
        *self
            .adjacency
            .entry(a.to_string())
            .or_default()
            .entry(b.to_string())
            .or_insert(0) += by;
        *self
            .adjacency
            .entry(b.to_string())
            .or_default()
            .entry(a.to_string())
            .or_insert(0) += by;
    }

    /// Rebuilds a graph from its parts, checking structural invariants.
    pub(crate) fn from_parts(
        nodes: Vec<KgNode>,
        cooccurrence: Vec<CooccurrenceEdge>,
        semantic: Vec<SemanticEdge>,
        attributes: Vec<AttributeEdge>,
        total_sentences: u64,
    ) -> Result<Self, KgError> {
        let mut g = KnowledgeGraph {
            total_sentences,
            ..Default::default()
        };
        for n in nodes {
            if n.sentence_count > n.mention_count {
                return Err(KgError::Invalid(format!("node {:?}: sentence_count > mention_count", n.lemma_key)));
            }
            if g.nodes.insert(n.lemma_key.clone(), n).is_some() {
                return Err(KgError::Invalid("duplicate node".into()));
            }
        }
        let sentence_count = |g: &KnowledgeGraph, k: &str| -> Result<u64, KgError> {
            g.nodes
                .get(k)
                .map(|n| n.sentence_count)
                .ok_or_else(|| KgError::Invalid(format!("edge endpoint {k:?} is not a node")))
        };
        for e in cooccurrence {
            if e.a >= e.b {
                return Err(KgError::Invalid(format!("co-occurrence edge {:?}-{:?} not ordered a < b", e.a, e.b)));
            }
            let limit = sentence_count(&g, &e.a)?.min(sentence_count(&g, &e.b)?);
            if e.count == 0 || e.count > limit {
                return Err(KgError::Invalid(format!("co-occurrence edge {:?}-{:?} count {} out of range", e.a, e.b, e.count)));
            }
            if g.edge_weight(&e.a, &e.b) != 0 {
                return Err(KgError::Invalid("duplicate co-occurrence edge".into()));
            }
            g.bump_pair(&e.a, &e.b, e.count);
        }
        for e in semantic {
            sentence_count(&g, &e.subject)?;
            sentence_count(&g, &e.object)?;
            if e.descriptor.is_empty() || e.evidence.is_empty() {
                return Err(KgError::Invalid("semantic edge without descriptor or evidence".into()));
            }
            g.add_semantic_edge(e);
        }
        for e in attributes {
            match g.nodes.get(&e.drug) {
                Some(n) if n.category == EntityCategory::Chemical => {}
                _ => return Err(KgError::Invalid(format!("attribute edge on non-drug {:?}", e.drug))),
            }
            if !e.attribute_category.is_attribute() || e.evidence.is_empty() || e.count == 0 {
                return Err(KgError::Invalid(format!("bad attribute edge on {:?}", e.drug)));
            }
            let key = (e.drug.clone(), e.attribute_category, e.value.clone());
            g.attributes.insert(key, e);
        }
        Ok(g)
    }
}

fn ratio_to_f64(r: &Ratio<u64>) -> f64 {
    r.to_f64().unwrap_or(0.0)
}

fn nearest<'a>(attr: &Entity, drugs: &[&'a Entity]) -> Option<&'a Entity> {
    let distance = |d: &Entity| {
        if attr.start >= d.end {
            attr.start - d.end
        } else {
            d.start.saturating_sub(attr.end)
        }
    };
    drugs
        .iter()
        .min_by_key(|d| (distance(d), d.start))
        .copied()
}

#[cfg(test)]
mod tests;
