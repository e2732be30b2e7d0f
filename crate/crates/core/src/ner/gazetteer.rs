use std::collections::HashMap;
use std::path::Path;

use super::{normalize, EntityCategory, NerError};
use crate::corpus::Lemmatizer;

const BUNDLED_GAZETTEER: &str = include_str!("../../data/gazetteer.csv");
const BUNDLED_UNITS: &str = include_str!("../../data/units.csv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub term: String,
    pub category: EntityCategory,
    /// Graph key the term maps to (its canonical form when one is given).
    pub lemma_key: String,
}

/// Number + unit pattern, e.g. `5 days` (DURATION) or `500 mg` (STRENGTH).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitPattern {
    pub unit: Vec<String>,
    pub category: EntityCategory,
}

/// Term lexicon keyed by lemma sequence, plus unit patterns. Immutable
/// once built.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: HashMap<Vec<String>, GazetteerEntry>,
    key_categories: HashMap<String, EntityCategory>,
    max_len: usize,
    units: Vec<UnitPattern>,
    max_unit_len: usize,
    lemmatizer: Lemmatizer,
}

/// Loads a gazetteer CSV with the bundled lemmatizer and unit patterns.
pub fn load_gazetteer(path: impl AsRef<Path>) -> Result<Gazetteer, NerError> {
    let gaz = Gazetteer::from_path(path, Lemmatizer::bundled())?;
    gaz.with_units_str(BUNDLED_UNITS, "units.csv")
}

fn read(path: &Path) -> Result<String, NerError> {
    std::fs::read_to_string(path).map_err(|source| NerError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn csv_rows(text: &str) -> impl Iterator<Item = (u64, Result<csv::StringRecord, csv::Error>)> + '_ {
    let reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader.into_records().map(|r| {
        let line = match &r {
            Ok(rec) => rec.position().map_or(0, |p| p.line()),
            Err(e) => e.position().map_or(0, |p| p.line()),
        };
        (line, r)
    })
}

impl Gazetteer {
    pub fn empty(lemmatizer: Lemmatizer) -> Self {
        Gazetteer {
            entries: HashMap::new(),
            key_categories: HashMap::new(),
            max_len: 0,
            units: Vec::new(),
            max_unit_len: 0,
            lemmatizer,
        }
    }

    /// The bundled 60-term gazetteer with bundled units.
    pub fn bundled() -> Self {
        Gazetteer::from_csv_str(BUNDLED_GAZETTEER, "gazetteer.csv", Lemmatizer::bundled())
            .and_then(|g| g.with_units_str(BUNDLED_UNITS, "units.csv"))
            .expect("bundled gazetteer is valid")
    }

    pub fn from_path(path: impl AsRef<Path>, lemmatizer: Lemmatizer) -> Result<Self, NerError> {
        let path = path.as_ref();
        let text = read(path)?;
        Self::from_csv_str(&text, &path.display().to_string(), lemmatizer)
    }

    /// Parses `term,category[,canonical]` rows.
    pub fn from_csv_str(text: &str, file: &str, lemmatizer: Lemmatizer) -> Result<Self, NerError> {
        let mut gaz = Gazetteer::empty(lemmatizer);
        for (line, row) in csv_rows(text) {
            let row = row.map_err(|e| NerError::Parse {
                file: file.to_string(),
                line,
                message: e.to_string(),
            })?;
            let parse_err = |message: String| NerError::Parse {
                file: file.to_string(),
                line,
                message,
            };
            if row.iter().all(str::is_empty) {
                continue;
            }
            if row.len() < 2 || row.len() > 3 {
                return Err(parse_err(format!("expected term,category[,canonical], got {} fields", row.len())));
            }
            let term = &row[0];
            let category: EntityCategory = row[1].parse().map_err(|e: super::UnknownCategory| parse_err(e.to_string()))?;
            let canonical = row.get(2).filter(|c| !c.is_empty());
            gaz.insert(term, category, canonical)?;
        }
        if gaz.is_empty() {
            tracing::warn!(file, "gazetteer has no entries");
        }
        Ok(gaz)
    }

    /// Adds a term. Errors when the term (after lemmatization) is already
    /// present with a different category or key, or when its key is already
    /// bound to another category.
    pub fn insert(
        &mut self,
        term: &str,
        category: EntityCategory,
        canonical: Option<&str>,
    ) -> Result<(), NerError> {
        let lemmas = self.lemmatizer.lemmatize_phrase(term);
        if lemmas.is_empty() {
            return Err(NerError::Conflict {
                term: term.to_string(),
                message: "term has no tokens".into(),
            });
        }
        let lemma_key = normalize(canonical.unwrap_or(term), &self.lemmatizer);
        if let Some(existing) = self.entries.get(&lemmas) {
            if existing.category != category || existing.lemma_key != lemma_key {
                return Err(NerError::Conflict {
                    term: term.to_string(),
                    message: format!(
                        "already {} -> {:?}, now {} -> {:?}",
                        existing.category, existing.lemma_key, category, lemma_key
                    ),
                });
            }
            return Ok(());
        }
        if let Some(&bound) = self.key_categories.get(&lemma_key) {
            if bound != category {
                return Err(NerError::Conflict {
                    term: term.to_string(),
                    message: format!("key {lemma_key:?} is {bound}, not {category}"),
                });
            }
        }
        self.key_categories.insert(lemma_key.clone(), category);
        self.max_len = self.max_len.max(lemmas.len());
        self.entries.insert(
            lemmas,
            GazetteerEntry {
                term: term.to_string(),
                category,
                lemma_key,
            },
        );
        Ok(())
    }

    pub fn with_units_path(self, path: impl AsRef<Path>) -> Result<Self, NerError> {
        let path = path.as_ref();
        let text = read(path)?;
        self.with_units_str(&text, &path.display().to_string())
    }

    /// Parses `unit,category` rows.
    pub fn with_units_str(mut self, text: &str, file: &str) -> Result<Self, NerError> {
        for (line, row) in csv_rows(text) {
            let parse_err = |message: String| NerError::Parse {
                file: file.to_string(),
                line,
                message,
            };
            let row = row.map_err(|e| parse_err(e.to_string()))?;
            if row.iter().all(str::is_empty) {
                continue;
            }
            if row.len() != 2 {
                return Err(parse_err(format!("expected unit,category, got {} fields", row.len())));
            }
            let category: EntityCategory = row[1].parse().map_err(|e: super::UnknownCategory| parse_err(e.to_string()))?;
            let unit = self.lemmatizer.lemmatize_phrase(&row[0]);
            if unit.is_empty() {
                return Err(parse_err("empty unit".into()));
            }
            self.max_unit_len = self.max_unit_len.max(unit.len());
            self.units.push(UnitPattern { unit, category });
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lemmatizer(&self) -> &Lemmatizer {
        &self.lemmatizer
    }

    pub fn get(&self, lemmas: &[String]) -> Option<&GazetteerEntry> {
        self.entries.get(lemmas)
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn units(&self) -> &[UnitPattern] {
        &self.units
    }

    pub(crate) fn max_unit_len(&self) -> usize {
        self.max_unit_len
    }

    /// Category bound to a graph key, if the key comes from this gazetteer.
    pub fn category_of(&self, lemma_key: &str) -> Option<EntityCategory> {
        self.key_categories.get(lemma_key).copied()
    }

    /// Distinct graph keys of one category, sorted.
    pub fn keys_of(&self, category: EntityCategory) -> Vec<String> {
        let mut keys: Vec<String> = self
            .key_categories
            .iter()
            .filter(|(_, &c)| c == category)
            .map(|(k, _)| k.clone())
            .collect();
        keys.sort();
        keys
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<String>, &GazetteerEntry)> {
        self.entries.iter()
    }
}
