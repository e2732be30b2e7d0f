//! Corpus loading from JSONL or a CORD-19 style metadata CSV plus per-paper
//! JSON files.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Document};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// One JSON document per line.
    Jsonl,
    /// Directory with `metadata.csv` whose `pdf_json_files` column points at
    /// full-text JSON parses.
    MetadataCsvJsonDir,
}

impl FromStr for CorpusFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "metadata-csv+json-dir" => Ok(CorpusFormat::MetadataCsvJsonDir),
            other => Err(CorpusError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Jsonl => "jsonl",
            CorpusFormat::MetadataCsvJsonDir => "metadata-csv+json-dir",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRecord {
    /// 1-based line (JSONL) or CSV record number.
    pub record: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub loaded: usize,
    pub skipped: Vec<SkippedRecord>,
}

impl LoadReport {
    pub fn skipped_count(&self) -> usize {
        self.skipped.len()
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub documents: Vec<Document>,
    pub report: LoadReport,
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<LoadedCorpus, CorpusError> {
    let path = path.as_ref();
    let mut report = LoadReport::default();
    let candidates = match format {
        CorpusFormat::Jsonl => read_jsonl(path, &mut report)?,
        CorpusFormat::MetadataCsvJsonDir => read_cord19(path, &mut report)?,
    };

    let mut seen = HashSet::new();
    let mut documents = Vec::with_capacity(candidates.len());
    for (record, doc) in candidates {
        if !seen.insert(doc.doc_id.clone()) {
            report.skipped.push(SkippedRecord {
                record,
                reason: format!("duplicate doc_id {:?}", doc.doc_id),
            });
            continue;
        }
        documents.push(doc);
    }
    report.skipped.sort_by_key(|s| s.record);
    report.loaded = documents.len();

    if documents.is_empty() {
        return Err(CorpusError::EmptyCorpus {
            path: path.display().to_string(),
            skipped: report.skipped_count(),
        });
    }
    for s in &report.skipped {
        tracing::warn!(record = s.record, reason = %s.reason, "skipped corpus record");
    }
    Ok(LoadedCorpus { documents, report })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonlRecord {
    doc_id: String,
    #[serde(default)]
    title: String,
    #[serde(rename = "abstract", default)]
    abstract_text: String,
    #[serde(default)]
    body: Option<String>,
    #[serde(default)]
    publish_date: Option<String>,
}

fn read_jsonl(path: &Path, report: &mut LoadReport) -> Result<Vec<(usize, Document)>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let record = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<JsonlRecord>(line)
            .map_err(|e| e.to_string())
            .and_then(|r| {
                let date = r.publish_date.as_deref().map(parse_date).transpose()?;
                build_document(r.doc_id, r.title, r.abstract_text, r.body.unwrap_or_default(), date)
            });
        match parsed {
            Ok(doc) => docs.push((record, doc)),
            Err(reason) => report.skipped.push(SkippedRecord { record, reason }),
        }
    }
    Ok(docs)
}

fn build_document(
    doc_id: String,
    title: String,
    abstract_text: String,
    body: String,
    publish_date: Option<NaiveDate>,
) -> Result<Document, String> {
    if doc_id.trim().is_empty() {
        return Err("empty doc_id".into());
    }
    Ok(Document {
        doc_id,
        title,
        abstract_text,
        body,
        publish_date,
    })
}

/// ISO-8601 calendar date; CORD-19 also uses bare `YYYY` which carries no
/// usable month and is treated as undated.
fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| format!("invalid publish_date {s:?}: {e}"))
}

#[derive(Deserialize)]
struct MetadataRow {
    cord_uid: String,
    #[serde(default)]
    title: String,
    #[serde(rename = "abstract", default)]
    abstract_text: String,
    #[serde(default)]
    publish_time: String,
    #[serde(default)]
    pdf_json_files: String,
}

#[derive(Deserialize)]
struct PaperJson {
    #[serde(default)]
    body_text: Vec<Paragraph>,
}

#[derive(Deserialize)]
struct Paragraph {
    text: String,
}

fn read_cord19(dir: &Path, report: &mut LoadReport) -> Result<Vec<(usize, Document)>, CorpusError> {
    let metadata = dir.join("metadata.csv");
    let mut reader = csv::Reader::from_path(&metadata).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => CorpusError::Io {
            path: metadata.display().to_string(),
            source,
        },
        other => CorpusError::Config(format!("{}: {other:?}", metadata.display())),
    })?;
    let mut docs = Vec::new();
    for (i, row) in reader.deserialize::<MetadataRow>().enumerate() {
        let record = i + 1;
        let parsed = row.map_err(|e| e.to_string()).and_then(|row| {
            let date = match row.publish_time.trim() {
                "" => None,
                t if t.len() == 4 => None,
                t => Some(parse_date(t)?),
            };
            let body = read_body(dir, &row.pdf_json_files)?;
            build_document(row.cord_uid, row.title, row.abstract_text, body, date)
        });
        match parsed {
            Ok(doc) => docs.push((record, doc)),
            Err(reason) => report.skipped.push(SkippedRecord { record, reason }),
        }
    }
    Ok(docs)
}

/// Joins body paragraphs of the first listed full-text JSON. A missing
/// column value means the paper has no parse and keeps title + abstract.
fn read_body(dir: &Path, files: &str) -> Result<String, String> {
    let Some(first) = files.split(';').map(str::trim).find(|f| !f.is_empty()) else {
        return Ok(String::new());
    };
    let path: PathBuf = dir.join(first);
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let paper: PaperJson =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(paper
        .body_text
        .into_iter()
        .map(|p| p.text)
        .collect::<Vec<_>>()
        .join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn jsonl(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn single_record_maps_fields() {
        let f = jsonl(
            r#"{"doc_id":"d1","title":"Fever in SARS","abstract":"...","publish_date":"2020-03-01"}"#,
        );
        let c = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(c.documents.len(), 1);
        let d = &c.documents[0];
        assert_eq!(d.doc_id, "d1");
        assert_eq!(d.title, "Fever in SARS");
        assert_eq!(d.abstract_text, "...");
        assert_eq!(d.body, "");
        assert_eq!(d.publish_date, NaiveDate::from_ymd_opt(2020, 3, 1));
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let f = jsonl("");
        assert!(matches!(
            load_corpus(f.path(), CorpusFormat::Jsonl),
            Err(CorpusError::EmptyCorpus { .. })
        ));
    }

    #[test]
    fn missing_path_is_io_error() {
        assert!(matches!(
            load_corpus("/no/such/corpus.jsonl", CorpusFormat::Jsonl),
            Err(CorpusError::Io { .. })
        ));
    }

    #[test]
    fn duplicates_and_bad_dates_are_skipped() {
        let f = jsonl(concat!(
            r#"{"doc_id":"a","title":"t","abstract":"x","body":null,"publish_date":null}"#,
            "\n",
            r#"{"doc_id":"a","title":"t2","abstract":"x","body":"b","publish_date":null}"#,
            "\n",
            r#"{"doc_id":"b","title":"t","abstract":"x","body":"","publish_date":"2020-13-01"}"#,
            "\n",
            r#"{"doc_id":"","title":"t","abstract":"x"}"#,
            "\n",
            r#"{"doc_id":"c","title":"t","abstract":"x","extra":1}"#,
            "\n"
        ));
        let c = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(c.documents.len(), 1);
        assert_eq!(c.documents[0].title, "t");
        let records: Vec<_> = c.report.skipped.iter().map(|s| s.record).collect();
        assert_eq!(records, [2, 3, 4, 5]);
    }

    #[test]
    fn format_tags() {
        assert_eq!("jsonl".parse::<CorpusFormat>().unwrap(), CorpusFormat::Jsonl);
        assert_eq!(
            "metadata-csv+json-dir".parse::<CorpusFormat>().unwrap(),
            CorpusFormat::MetadataCsvJsonDir
        );
        assert!("xml".parse::<CorpusFormat>().is_err());
    }

    #[test]
    fn cord19_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("pdf_json")).unwrap();
        std::fs::write(
            dir.path().join("pdf_json/p1.json"),
            r#"{"paper_id":"p1","body_text":[{"text":"Fever was common.","section":"Results"},{"text":"Cough too."}]}"#,
        )
        .unwrap();
        std::fs::write(
            dir.path().join("metadata.csv"),
            "cord_uid,title,abstract,publish_time,pdf_json_files\n\
             u1,COVID-19 symptoms,Abstract one.,2020-04-02,pdf_json/p1.json\n\
             u2,Old SARS paper,Abstract two.,2004,\n\
             u3,Broken,Abstract three.,2020-01-01,pdf_json/missing.json\n",
        )
        .unwrap();
        let c = load_corpus(dir.path(), CorpusFormat::MetadataCsvJsonDir).unwrap();
        assert_eq!(c.documents.len(), 2);
        assert_eq!(c.documents[0].body, "Fever was common.\nCough too.");
        assert_eq!(c.documents[1].body, "");
        assert_eq!(c.documents[1].publish_date, None);
        assert_eq!(c.report.skipped_count(), 1);
        assert_eq!(c.report.skipped[0].record, 3);
    }
}
