//! Dictionary + suffix-rule lemmatizer.
//!
//! A word is first looked up in the exceptions lexicon; otherwise one suffix
//! rule is applied. The step repeats until nothing changes, so the result is
//! always a fixed point and lemmatizing twice gives the same lemma.
//!
//! Suffix rules (purely alphabetic words only):
//!
//! | suffix | action | example |
//! |--------|--------|---------|
//! | `ies` (len ≥ 5) | → `y` | studies → study |
//! | `ied` (len ≥ 5) | → `y` | studied → study |
//! | `sses` | → `ss` | illnesses → illness |
//! | `aches` | → `ache` | stomachaches → stomachache |
//! | `xes` `ches` `shes` `zes` | drop `es` | rashes → rash |
//! | `s` (len ≥ 4, not `ss` `us` `is`) | drop | fevers → fever |
//! | `ing` | drop, then repair stem | coughing → cough, running → run, taking → take |
//! | `ed` (len ≥ 4, not `eed`) | drop, then repair stem | coughed → cough, stopped → stop |
//!
//! Stem repair after `ing`/`ed`: a doubled final consonant other than
//! `l`, `s`, `z` is undoubled; a stem ending in `v`, `c`, `iz`, or a long stem
//! ending in `at`, gets an `e` back; a three-letter consonant-vowel-consonant
//! stem gets an `e` back. Stems must keep at least three letters and a vowel.

use std::collections::HashMap;
use std::path::Path;

use super::{CorpusError, Token};

const BUNDLED_EXCEPTIONS: &str = include_str!("../../data/lemma_exceptions.txt");

#[derive(Debug, Clone)]
pub struct Lemmatizer {
    exceptions: HashMap<String, String>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        Self::bundled()
    }
}

impl Lemmatizer {
    /// Lemmatizer with the exceptions lexicon shipped in the crate.
    pub fn bundled() -> Self {
        Self::from_exceptions_str(BUNDLED_EXCEPTIONS).expect("bundled lemma exceptions are valid")
    }

    /// Rules only, no exceptions lexicon.
    pub fn rules_only() -> Self {
        Lemmatizer {
            exceptions: HashMap::new(),
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_exceptions_str(&text)
    }

    /// Parses `surface lemma` lines; `#` starts a comment.
    pub fn from_exceptions_str(text: &str) -> Result<Self, CorpusError> {
        let mut exceptions = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(surface), Some(lemma), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(CorpusError::Config(format!(
                    "lemma exceptions line {}: expected `surface lemma`",
                    lineno + 1
                )));
            };
            exceptions.insert(surface.to_lowercase(), lemma.to_lowercase());
        }
        let lemmatizer = Lemmatizer { exceptions };
        for target in lemmatizer.exceptions.values() {
            if lemmatizer.step(target) != *target {
                return Err(CorpusError::Config(format!(
                    "lemma exception target {target:?} is not a fixed point"
                )));
            }
        }
        Ok(lemmatizer)
    }

    /// Lemma of a single word; lowercase, idempotent.
    pub fn lemma(&self, word: &str) -> String {
        let mut current = word.to_lowercase();
        loop {
            let next = self.step(&current);
            if next == current {
                return current;
            }
            current = next;
        }
    }

    /// Fills `token.lemma` from its surface.
    pub fn lemmatize(&self, mut token: Token) -> Token {
        token.lemma = self.lemma(&token.surface);
        token
    }

    /// Lemmatizes every word of a phrase and joins with single spaces.
    pub fn lemmatize_phrase(&self, phrase: &str) -> Vec<String> {
        super::tokenize(phrase)
            .into_iter()
            .map(|t| self.lemma(&t.surface))
            .collect()
    }

    fn step(&self, word: &str) -> String {
        if let Some(lemma) = self.exceptions.get(word) {
            return lemma.clone();
        }
        if word.is_empty() || !word.chars().all(char::is_alphabetic) {
            return word.to_string();
        }
        apply_suffix_rule(word).unwrap_or_else(|| word.to_string())
    }
}

fn apply_suffix_rule(word: &str) -> Option<String> {
    let len = word.chars().count();
    if len >= 5 {
        if let Some(stem) = word.strip_suffix("ies") {
            return Some(format!("{stem}y"));
        }
        if let Some(stem) = word.strip_suffix("ied") {
            return Some(format!("{stem}y"));
        }
    }
    if let Some(stem) = word.strip_suffix("sses") {
        return Some(format!("{stem}ss"));
    }
    if let Some(stem) = word.strip_suffix("aches") {
        return Some(format!("{stem}ache"));
    }
    for suffix in ["xes", "ches", "shes", "zes"] {
        if word.ends_with(suffix) && len > suffix.len() + 1 {
            return Some(word[..word.len() - 2].to_string());
        }
    }
    if len >= 4
        && word.ends_with('s')
        && !(word.ends_with("ss") || word.ends_with("us") || word.ends_with("is"))
    {
        return Some(word[..word.len() - 1].to_string());
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if valid_stem(stem) {
            return Some(repair_stem(stem));
        }
    }
    if len >= 4 && !word.ends_with("eed") {
        if let Some(stem) = word.strip_suffix("ed") {
            if valid_stem(stem) {
                return Some(repair_stem(stem));
            }
        }
    }
    None
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn valid_stem(stem: &str) -> bool {
    stem.chars().count() >= 3 && stem.chars().any(is_vowel)
}

fn repair_stem(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    let last = chars[n - 1];
    if n >= 2 && chars[n - 2] == last && !is_vowel(last) && !matches!(last, 'l' | 's' | 'z') {
        return chars[..n - 1].iter().collect();
    }
    let needs_e = matches!(last, 'v' | 'c')
        || stem.ends_with("iz")
        || (stem.ends_with("at") && n > 5)
        || (n == 3
            && !is_vowel(chars[0])
            && is_vowel(chars[1])
            && !is_vowel(last)
            && !matches!(last, 'w' | 'x' | 'y'));
    if needs_e {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plural_and_fixed_point() {
        let l = Lemmatizer::bundled();
        assert_eq!(l.lemma("Fevers"), "fever");
        assert_eq!(l.lemma("fever"), "fever");
        assert_eq!(l.lemma("coughing"), "cough");
    }

    #[test]
    fn non_alphabetic_words_only_lowercased() {
        let l = Lemmatizer::bundled();
        assert_eq!(l.lemma("COVID-19"), "covid-19");
        assert_eq!(l.lemma("500"), "500");
        assert_eq!(l.lemma(","), ",");
    }

    #[test]
    fn rejects_non_fixed_point_exception() {
        let err = Lemmatizer::from_exceptions_str("foo fevers\n").unwrap_err();
        assert!(matches!(err, CorpusError::Config(_)));
    }

    #[test]
    fn rejects_malformed_exception_line() {
        assert!(Lemmatizer::from_exceptions_str("just_one\n").is_err());
    }

    #[test]
    fn missing_exceptions_file_is_io_error() {
        assert!(matches!(
            Lemmatizer::from_path("/nonexistent/lemmas.txt"),
            Err(CorpusError::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn idempotent_and_case_insensitive(word in "[a-zA-Z]{1,14}(ing|ed|s|es|ies)?") {
            let l = Lemmatizer::bundled();
            let once = l.lemma(&word);
            prop_assert_eq!(l.lemma(&once), once.clone());
            prop_assert_eq!(l.lemma(&word.to_uppercase()), once.clone());
            prop_assert_eq!(once.to_lowercase(), once);
        }
    }
}
