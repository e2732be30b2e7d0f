//! Oral-language phrases ("can't smell", "tylenol") mapped to gazetteer keys.

use std::path::Path;

use super::DialogueError;
use crate::ner::{EntityCategory, Gazetteer};

const BUNDLED_COLLOQUIAL: &str = include_str!("../../data/colloquial.csv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColloquialRow {
    pub phrase: String,
    pub lemma_key: String,
    pub category: EntityCategory,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColloquialTable {
    rows: Vec<ColloquialRow>,
}

impl ColloquialTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_COLLOQUIAL).expect("bundled colloquial table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DialogueError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DialogueError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses `phrase,lemma_key[,category]` rows (category defaults to
    /// DISEASE); `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, DialogueError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| DialogueError::Parse {
                file: "colloquial table".into(),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |m: String| DialogueError::Parse {
                file: "colloquial table".into(),
                message: format!("line {line}: {m}"),
            };
            if !(2..=3).contains(&record.len()) || record[0].is_empty() || record[1].is_empty() {
                return Err(bad("expected phrase,lemma_key[,category]".into()));
            }
            let category = match record.get(2) {
                Some(c) if !c.is_empty() => c.parse().map_err(|e: crate::ner::UnknownCategory| bad(e.to_string()))?,
                _ => EntityCategory::Disease,
            };
            rows.push(ColloquialRow {
                phrase: record[0].to_string(),
                lemma_key: record[1].to_string(),
                category,
            });
        }
        Ok(ColloquialTable { rows })
    }

    pub fn rows(&self) -> &[ColloquialRow] {
        &self.rows
    }

    /// Adds every phrase to the gazetteer under its canonical key.
    pub fn apply(&self, gazetteer: &mut Gazetteer) -> Result<(), DialogueError> {
        for row in &self.rows {
            gazetteer.insert(&row.phrase, row.category, Some(&row.lemma_key))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;
    use crate::ner::extract_entities;

    #[test]
    fn cant_smell_maps_to_anosmia() {
        let mut gaz = Gazetteer::bundled();
        ColloquialTable::bundled().apply(&mut gaz).unwrap();
        let s = Sentence::from_text("chat", 0, "I can't smell anything", gaz.lemmatizer());
        let e = extract_entities(&s, &gaz);
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].surface.as_str(), e[0].lemma_key.as_str()), ("can't smell", "anosmia"));
        assert_eq!(e[0].category, EntityCategory::Disease);
    }

    #[test]
    fn brand_names_map_to_drugs() {
        let mut gaz = Gazetteer::bundled();
        ColloquialTable::bundled().apply(&mut gaz).unwrap();
        let s = Sentence::from_text("chat", 0, "I took Tylenol", gaz.lemmatizer());
        let e = extract_entities(&s, &gaz);
        assert_eq!((e[0].lemma_key.as_str(), e[0].category), ("paracetamol", EntityCategory::Chemical));
    }

    #[test]
    fn conflicting_row_rejected() {
        let mut gaz = Gazetteer::bundled();
        let table = ColloquialTable::parse("fever,paracetamol,CHEMICAL\n").unwrap();
        assert!(table.apply(&mut gaz).is_err());
        assert!(ColloquialTable::parse("only-one-field\n").is_err());
    }
}
