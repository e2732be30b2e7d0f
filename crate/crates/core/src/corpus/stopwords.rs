use std::collections::HashSet;
use std::path::Path;

use super::{CorpusError, Token};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Stopword lexicon keyed by lemma.
#[derive(Debug, Clone)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::bundled()
    }
}

impl Stopwords {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    /// Loads a UTF-8 lexicon, one lowercase word per line, `#` comments.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            CorpusError::Config(format!("stopword lexicon {}: {e}", path.display()))
        })?;
        Ok(Self::parse(&text))
    }

    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        Stopwords { words }
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.words.contains(lemma)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Sets `is_stopword` on each token from its lemma.
    pub fn mark(&self, tokens: &mut [Token]) {
        for t in tokens {
            t.is_stopword = self.contains(&t.lemma);
        }
    }
}

/// Drops stopwords and pure punctuation, keeping order.
pub fn remove_stopwords(tokens: Vec<Token>, stopwords: &Stopwords) -> Vec<Token> {
    tokens
        .into_iter()
        .filter(|t| !t.is_punctuation() && !stopwords.contains(&t.lemma))
        .collect()
}
