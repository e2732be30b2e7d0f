//! Relation-phrase patterns for directed, labelled edges.
//!
//! For each pair of consecutive entities in a sentence, the lemmas strictly
//! between them are searched for the longest pattern phrase (table order
//! breaks ties). `forward` makes the left entity the subject, `reverse` the
//! right one. "A headache is a symptom of COVID-19" thus yields
//! headache → covid-19 labelled "symptom".

use std::collections::BTreeSet;
use std::path::Path;
use std::str::FromStr;

use super::{Evidence, EvidenceRef, KgError, SemanticEdge};
use crate::corpus::{Lemmatizer, Sentence};
use crate::ner::Entity;

const BUNDLED_RELATIONS: &str = include_str!("../../data/relations.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Reverse,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "forward" => Ok(Direction::Forward),
            "reverse" => Ok(Direction::Reverse),
            other => Err(format!("direction must be forward or reverse, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationPattern {
    pub phrase: Vec<String>,
    pub descriptor: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, Default)]
pub struct RelationPatterns {
    patterns: Vec<RelationPattern>,
}

impl RelationPatterns {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_RELATIONS, &Lemmatizer::bundled()).expect("bundled relation table is valid")
    }

    pub fn load(path: impl AsRef<Path>, lemmatizer: &Lemmatizer) -> Result<Self, KgError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| KgError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, lemmatizer)
    }

    /// Parses `pattern_phrase,descriptor,direction` rows; `#` comments.
    pub fn parse(text: &str, lemmatizer: &Lemmatizer) -> Result<Self, KgError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut patterns = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| KgError::Invalid(format!("relation table: {e}")))?;
            let line = row.position().map_or(0, |p| p.line());
            let bad = |m: String| KgError::Invalid(format!("relation table line {line}: {m}"));
            if row.len() != 3 {
                return Err(bad(format!("expected 3 fields, got {}", row.len())));
            }
            let phrase = lemmatizer.lemmatize_phrase(&row[0]);
            if phrase.is_empty() || row[1].is_empty() {
                return Err(bad("empty phrase or descriptor".into()));
            }
            patterns.push(RelationPattern {
                phrase,
                descriptor: row[1].to_string(),
                direction: row[2].parse().map_err(bad)?,
            });
        }
        Ok(RelationPatterns { patterns })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    fn best_match(&self, lemmas: &[&str]) -> Option<&RelationPattern> {
        let mut best: Option<&RelationPattern> = None;
        for p in &self.patterns {
            let n = p.phrase.len();
            let found = n <= lemmas.len()
                && lemmas
                    .windows(n)
                    .any(|w| w.iter().zip(&p.phrase).all(|(a, b)| *a == b));
            if found && best.is_none_or(|b| n > b.phrase.len()) {
                best = Some(p);
            }
        }
        best
    }
}

/// Directed edges from relation phrases between consecutive entities.
/// Each (subject, object, descriptor) appears at most once per sentence.
pub fn extract_semantic_edges(
    sentence: &Sentence,
    entities: &[Entity],
    patterns: &RelationPatterns,
) -> Vec<SemanticEdge> {
    if entities.len() < 2 {
        return Vec::new();
    }
    let mut ordered: Vec<&Entity> = entities.iter().collect();
    ordered.sort_by_key(|e| e.start);

    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for pair in ordered.windows(2) {
        let (left, right) = (pair[0], pair[1]);
        let between: Vec<&str> = sentence
            .tokens
            .iter()
            .filter(|t| t.start >= left.end && t.end <= right.start)
            .map(|t| t.lemma.as_str())
            .collect();
        let Some(pattern) = patterns.best_match(&between) else {
            continue;
        };
        let (subject, object) = match pattern.direction {
            Direction::Forward => (left, right),
            Direction::Reverse => (right, left),
        };
        if subject.lemma_key == object.lemma_key {
            continue;
        }
        let key = (
            subject.lemma_key.clone(),
            object.lemma_key.clone(),
            pattern.descriptor.clone(),
        );
        if seen.insert(key.clone()) {
            edges.push(SemanticEdge {
                subject: key.0,
                object: key.1,
                descriptor: key.2,
                count: 1,
                evidence: Evidence::from_iter([EvidenceRef::of(sentence)]),
            });
        }
    }
    edges
}
