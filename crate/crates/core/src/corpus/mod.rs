//! Literature corpus handling: loading, sentence segmentation, tokenization,
//! lemmatization, stopword removal and COVID keyword filtering.
//!
//! Everything here except [`load_corpus`] is a pure function over borrowed
//! input, so documents can be processed in parallel without coordination.

mod filter;
mod lemma;
mod loader;
mod segment;
mod stopwords;
mod tokenize;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use filter::{filter_covid_docs, is_covid_related, COVID_KEYWORDS};
pub use lemma::Lemmatizer;
pub use loader::{load_corpus, CorpusFormat, LoadReport, LoadedCorpus, SkippedRecord};
pub use segment::{split_sentences, split_text};
pub use stopwords::{remove_stopwords, Stopwords};
pub use tokenize::{is_punctuation, tokenize};

/// One literature record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub publish_date: Option<NaiveDate>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, title: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            title: title.into(),
            abstract_text: String::new(),
            body: String::new(),
            publish_date: None,
        }
    }

    pub fn with_abstract(mut self, text: impl Into<String>) -> Self {
        self.abstract_text = text.into();
        self
    }

    pub fn with_body(mut self, text: impl Into<String>) -> Self {
        self.body = text.into();
        self
    }

    pub fn with_date(mut self, date: NaiveDate) -> Self {
        self.publish_date = Some(date);
        self
    }

    /// Title, abstract and body joined by blank lines. Sentence offsets
    /// refer to this string.
    pub fn full_text(&self) -> String {
        let mut text = String::with_capacity(
            self.title.len() + self.abstract_text.len() + self.body.len() + 4,
        );
        text.push_str(&self.title);
        text.push_str(SECTION_SEPARATOR);
        text.push_str(&self.abstract_text);
        text.push_str(SECTION_SEPARATOR);
        text.push_str(&self.body);
        text
    }
}

pub(crate) const SECTION_SEPARATOR: &str = "\n\n";

/// A word or punctuation mark. Offsets are byte offsets into the text the
/// token was produced from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub lemma: String,
    pub start: usize,
    pub end: usize,
    pub is_stopword: bool,
}

impl Token {
    pub fn is_punctuation(&self) -> bool {
        is_punctuation(&self.surface)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub doc_id: String,
    pub index: usize,
    /// Byte offset of `text` within [`Document::full_text`].
    pub offset: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Builds a standalone sentence (used for chat messages), tokenized and
    /// lemmatized.
    pub fn from_text(
        doc_id: impl Into<String>,
        index: usize,
        text: impl Into<String>,
        lemmatizer: &Lemmatizer,
    ) -> Self {
        let text = text.into();
        let tokens = tokenize(&text)
            .into_iter()
            .map(|t| lemmatizer.lemmatize(t))
            .collect();
        Sentence {
            doc_id: doc_id.into(),
            index,
            offset: 0,
            text,
            tokens,
        }
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.lemma.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no documents could be loaded from {path} ({skipped} records skipped)")]
    EmptyCorpus { path: String, skipped: usize },
    #[error("unknown corpus format {0:?} (expected \"jsonl\" or \"metadata-csv+json-dir\")")]
    UnknownFormat(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Tokenization + lemmatization + stopword marking for whole documents.
#[derive(Debug, Clone, Default)]
pub struct TextPipeline {
    pub lemmatizer: Lemmatizer,
    pub stopwords: Stopwords,
}

impl TextPipeline {
    pub fn new(lemmatizer: Lemmatizer, stopwords: Stopwords) -> Self {
        TextPipeline { lemmatizer, stopwords }
    }

    /// Sentences of `doc` with lemmas filled and stopwords flagged.
    pub fn sentences(&self, doc: &Document) -> Vec<Sentence> {
        let mut sentences = split_sentences(doc);
        for s in &mut sentences {
            self.prepare(&mut s.tokens);
        }
        sentences
    }

    pub fn sentence_from_text(&self, doc_id: &str, text: &str) -> Sentence {
        let mut s = Sentence::from_text(doc_id, 0, text, &self.lemmatizer);
        self.stopwords.mark(&mut s.tokens);
        s
    }

    fn prepare(&self, tokens: &mut [Token]) {
        for t in tokens.iter_mut() {
            t.lemma = self.lemmatizer.lemma(&t.surface);
        }
        self.stopwords.mark(tokens);
    }
}
