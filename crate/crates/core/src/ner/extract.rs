use std::sync::LazyLock;

use regex::Regex;

use super::{Entity, EntityCategory, Gazetteer};
use crate::corpus::Sentence;

static NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\d+(?:[.,]\d+)?(?:-\d+(?:[.,]\d+)?)?$").unwrap());

const NUMBER_WORDS: &[&str] = &[
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "fourteen", "twenty", "thirty",
];

fn is_number(lemma: &str) -> bool {
    NUMBER.is_match(lemma) || NUMBER_WORDS.contains(&lemma)
}

/// Greedy left-to-right longest match over token lemmas.
///
/// At each position the longest gazetteer sequence wins; when no gazetteer
/// term starts there, a number + unit pattern is tried (`5 days`,
/// `500 mg`, `3 times a day`, and `every 8 hours` as FREQUENCY).
pub fn extract_entities(sentence: &Sentence, gaz: &Gazetteer) -> Vec<Entity> {
    let lemmas: Vec<&str> = sentence.tokens.iter().map(|t| t.lemma.as_str()).collect();
    let mut entities = Vec::new();
    let mut i = 0;
    while i < lemmas.len() {
        if let Some((len, category, key)) = gazetteer_match(&lemmas[i..], gaz) {
            entities.push(make_entity(sentence, i, i + len, category, Some(key)));
            i += len;
        } else if let Some((len, category)) = pattern_match(&lemmas[i..], gaz) {
            entities.push(make_entity(sentence, i, i + len, category, None));
            i += len;
        } else {
            i += 1;
        }
    }
    entities
}

fn gazetteer_match(lemmas: &[&str], gaz: &Gazetteer) -> Option<(usize, EntityCategory, String)> {
    let max = gaz.max_len().min(lemmas.len());
    (1..=max).rev().find_map(|len| {
        let key: Vec<String> = lemmas[..len].iter().map(|s| s.to_string()).collect();
        gaz.get(&key).map(|e| (len, e.category, e.lemma_key.clone()))
    })
}

fn pattern_match(lemmas: &[&str], gaz: &Gazetteer) -> Option<(usize, EntityCategory)> {
    if lemmas.first() == Some(&"every") {
        if let Some((len, EntityCategory::Duration)) = number_unit(&lemmas[1..], gaz) {
            return Some((len + 1, EntityCategory::Frequency));
        }
    }
    number_unit(lemmas, gaz)
}

fn number_unit(lemmas: &[&str], gaz: &Gazetteer) -> Option<(usize, EntityCategory)> {
    if !lemmas.first().is_some_and(|l| is_number(l)) {
        return None;
    }
    let rest = &lemmas[1..];
    let mut best: Option<(usize, EntityCategory)> = None;
    for pattern in gaz.units() {
        let n = pattern.unit.len();
        if n > rest.len() || n > gaz.max_unit_len() {
            continue;
        }
        let matches = pattern.unit.iter().zip(rest).all(|(u, l)| u == l);
        if matches && best.is_none_or(|(len, _)| n + 1 > len) {
            best = Some((n + 1, pattern.category));
        }
    }
    best
}

fn make_entity(
    sentence: &Sentence,
    from: usize,
    to: usize,
    category: EntityCategory,
    key: Option<String>,
) -> Entity {
    let start = sentence.tokens[from].start;
    let end = sentence.tokens[to - 1].end;
    let surface = &sentence.text[start..end];
    let lemma_key = key.unwrap_or_else(|| {
        surface
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase()
    });
    Entity {
        surface: surface.to_string(),
        lemma_key,
        category,
        doc_id: sentence.doc_id.clone(),
        sentence_index: sentence.index,
        start,
        end,
    }
}
