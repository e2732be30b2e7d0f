//! Nearest-example intent classifier.
//!
//! Messages become term-frequency vectors over lemmas. Entity mentions are
//! replaced by a category placeholder (`<disease>`, `<chemical>`, ...) so
//! "I took ibuprofen" sits next to the training example "I took paracetamol".
//! Stopwords are kept: "how", "what" and "I" carry most of the intent signal.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{DialogueError, Intent, IntentTag};
use crate::corpus::Sentence;
use crate::ner::{extract_entities, Gazetteer};

pub const DEFAULT_INTENT_THRESHOLD: f64 = 0.35;

const BUNDLED_TRAINING: &str = include_str!("../../data/intents.json");

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingExample {
    pub text: String,
    pub intent: IntentTag,
}

pub fn bundled_training_set() -> Vec<TrainingExample> {
    parse_training_set(BUNDLED_TRAINING).expect("bundled training set is valid")
}

pub fn parse_training_set(json: &str) -> Result<Vec<TrainingExample>, DialogueError> {
    serde_json::from_str(json).map_err(|e| DialogueError::Parse {
        file: "training set".into(),
        message: e.to_string(),
    })
}

pub fn load_training_set(path: impl AsRef<Path>) -> Result<Vec<TrainingExample>, DialogueError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DialogueError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_training_set(&text).map_err(|e| match e {
        DialogueError::Parse { message, .. } => DialogueError::Parse {
            file: path.display().to_string(),
            message,
        },
        other => other,
    })
}

type Vector = BTreeMap<String, f64>;

fn norm(v: &Vector) -> f64 {
    v.values().map(|x| x * x).sum::<f64>().sqrt()
}

fn cosine(a: &Vector, na: f64, b: &Vector, nb: f64) -> f64 {
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = a.iter().filter_map(|(k, x)| b.get(k).map(|y| x * y)).sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
struct Example {
    intent: IntentTag,
    vector: Vector,
    norm: f64,
}

#[derive(Debug, Clone)]
pub struct IntentClassifier {
    examples: Vec<Example>,
    gazetteer: Gazetteer,
    threshold: f64,
}

impl IntentClassifier {
    /// Needs at least one example for every intent except OUT_OF_SCOPE, which
    /// is what the threshold yields.
    pub fn train(
        examples: &[TrainingExample],
        gazetteer: Gazetteer,
        threshold: f64,
    ) -> Result<Self, DialogueError> {
        if examples.is_empty() {
            return Err(DialogueError::Config("intent training set is empty".into()));
        }
        let missing: Vec<&str> = IntentTag::ALL
            .iter()
            .filter(|t| **t != IntentTag::OutOfScope)
            .filter(|t| !examples.iter().any(|e| e.intent == **t))
            .map(|t| t.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(DialogueError::Config(format!(
                "intent training set has no examples for {}",
                missing.join(", ")
            )));
        }
        if !(0.0..=1.0).contains(&threshold) {
            return Err(DialogueError::Config(format!("intent threshold {threshold} is outside [0, 1]")));
        }
        let mut classifier = IntentClassifier {
            examples: Vec::new(),
            gazetteer,
            threshold,
        };
        classifier.examples = examples
            .iter()
            .map(|e| {
                let vector = classifier.featurize(&e.text);
                Example {
                    intent: e.intent,
                    norm: norm(&vector),
                    vector,
                }
            })
            .collect();
        Ok(classifier)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Term frequencies of lemmas, with entity spans collapsed to placeholders.
    pub fn featurize(&self, text: &str) -> BTreeMap<String, f64> {
        let sentence = Sentence::from_text("", 0, text, self.gazetteer.lemmatizer());
        let entities = extract_entities(&sentence, &self.gazetteer);
        let mut v = Vector::new();
        let mut ents = entities.iter().peekable();
        for token in &sentence.tokens {
            while ents.peek().is_some_and(|e| e.end <= token.start) {
                ents.next();
            }
            let term = match ents.peek() {
                Some(e) if token.start >= e.start && token.end <= e.end => {
                    if token.start != e.start {
                        continue;
                    }
                    format!("<{}>", e.category.as_str().to_ascii_lowercase())
                }
                _ if token.is_punctuation() => continue,
                _ => token.lemma.clone(),
            };
            *v.entry(term).or_insert(0.0) += 1.0;
        }
        v
    }

    pub fn classify(&self, text: &str) -> Intent {
        let v = self.featurize(text);
        let nv = norm(&v);
        let mut best: Option<(IntentTag, f64)> = None;
        for e in &self.examples {
            let score = cosine(&v, nv, &e.vector, e.norm);
            let better = match best {
                None => true,
                Some((tag, s)) => score > s || (score == s && e.intent < tag),
            };
            if better {
                best = Some((e.intent, score));
            }
        }
        let (tag, confidence) = best.unwrap_or((IntentTag::OutOfScope, 0.0));
        if confidence < self.threshold {
            Intent {
                tag: IntentTag::OutOfScope,
                confidence,
            }
        } else {
            Intent { tag, confidence }
        }
    }
}
