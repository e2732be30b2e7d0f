//! Typed medical entity extraction.
//!
//! The default extractor is a gazetteer: greedy longest match over token
//! lemma sequences, with number + unit patterns for dosage-like values.
//! Anything implementing [`EntityExtractor`] can replace it.

mod extract;
mod gazetteer;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Lemmatizer, Sentence};

pub use extract::extract_entities;
pub use gazetteer::{load_gazetteer, Gazetteer, GazetteerEntry, UnitPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityCategory {
    Disease,
    Chemical,
    Form,
    Route,
    Frequency,
    Dosage,
    Strength,
    Duration,
}

impl EntityCategory {
    pub const ALL: [EntityCategory; 8] = [
        EntityCategory::Disease,
        EntityCategory::Chemical,
        EntityCategory::Form,
        EntityCategory::Route,
        EntityCategory::Frequency,
        EntityCategory::Dosage,
        EntityCategory::Strength,
        EntityCategory::Duration,
    ];

    /// Categories that describe a drug rather than stand on their own.
    pub const ATTRIBUTES: [EntityCategory; 6] = [
        EntityCategory::Dosage,
        EntityCategory::Duration,
        EntityCategory::Frequency,
        EntityCategory::Strength,
        EntityCategory::Form,
        EntityCategory::Route,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityCategory::Disease => "DISEASE",
            EntityCategory::Chemical => "CHEMICAL",
            EntityCategory::Form => "FORM",
            EntityCategory::Route => "ROUTE",
            EntityCategory::Frequency => "FREQUENCY",
            EntityCategory::Dosage => "DOSAGE",
            EntityCategory::Strength => "STRENGTH",
            EntityCategory::Duration => "DURATION",
        }
    }

    pub fn is_attribute(self) -> bool {
        Self::ATTRIBUTES.contains(&self)
    }
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown entity category {0:?}")]
pub struct UnknownCategory(pub String);

impl FromStr for EntityCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        EntityCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == upper)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// An extracted mention. `start`/`end` are byte offsets into the sentence
/// text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub surface: String,
    pub lemma_key: String,
    pub category: EntityCategory,
    pub doc_id: String,
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
}

/// Sentence → entities. Implementations must be deterministic and return
/// non-overlapping spans in text order.
pub trait EntityExtractor: Send + Sync {
    fn extract(&self, sentence: &Sentence) -> Vec<Entity>;
}

impl EntityExtractor for Gazetteer {
    fn extract(&self, sentence: &Sentence) -> Vec<Entity> {
        extract_entities(sentence, self)
    }
}

/// Graph key for a surface form: lowercase, per-word lemma, single spaces.
pub fn normalize(surface: &str, lemmatizer: &Lemmatizer) -> String {
    surface
        .split_whitespace()
        .map(|w| lemmatizer.lemma(w))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, thiserror::Error)]
pub enum NerError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },
    #[error("conflicting gazetteer entries for {term:?}: {message}")]
    Conflict { term: String, message: String },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let l = Lemmatizer::bundled();
        assert_eq!(normalize("Fevers", &l), "fever");
        assert_eq!(normalize("Magnesium  Hydroxide", &l), "magnesium hydroxide");
        assert_eq!(normalize("cough", &l), "cough");
        assert_eq!(normalize(" Low-Normal\tProcalcitonin ", &l), "low-normal procalcitonin");
    }

    #[test]
    fn category_round_trip() {
        for c in EntityCategory::ALL {
            assert_eq!(c.as_str().parse::<EntityCategory>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{c}\""));
        }
        assert_eq!("duration".parse::<EntityCategory>().unwrap(), EntityCategory::Duration);
        assert!("SYMPTOM".parse::<EntityCategory>().is_err());
    }
}
