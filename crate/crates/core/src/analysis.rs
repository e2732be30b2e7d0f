//! Corpus analytics: title word counts, per-symptom document counts and
//! monthly trend series. Everything here is a pure function of the documents
//! (and gazetteer); outputs are plain tables meant for external plotting.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::corpus::{filter_covid_docs, tokenize, Document, TextPipeline};
use crate::ner::{extract_entities, EntityCategory, Gazetteer};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyEntry {
    pub term: String,
    pub count: u64,
}

/// Term counts, sorted by count descending then term ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FrequencyTable {
    pub entries: Vec<FrequencyEntry>,
}

impl FrequencyTable {
    pub fn from_counts<I: IntoIterator<Item = (String, u64)>>(counts: I) -> Self {
        let mut entries: Vec<FrequencyEntry> = counts
            .into_iter()
            .map(|(term, count)| FrequencyEntry { term, count })
            .collect();
        entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
        FrequencyTable { entries }
    }

    pub fn truncate(mut self, n: usize) -> Self {
        self.entries.truncate(n);
        self
    }

    pub fn get(&self, term: &str) -> Option<u64> {
        self.entries.iter().find(|e| e.term == term).map(|e| e.count)
    }

    pub fn terms(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.term.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["term", "count"]).expect("in-memory write");
        for e in &self.entries {
            w.write_record([e.term.as_str(), &e.count.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Calendar month, printed as `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        YearMonth { year, month }
    }

    pub fn of(date: NaiveDate) -> Self {
        YearMonth::new(date.year(), date.month())
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            YearMonth::new(self.year + 1, 1)
        } else {
            YearMonth::new(self.year, self.month + 1)
        }
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrendBucket {
    pub month: YearMonth,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrendSeries {
    pub term: String,
    pub buckets: Vec<TrendBucket>,
}

impl TrendSeries {
    pub fn counts(&self) -> Vec<u64> {
        self.buckets.iter().map(|b| b.count).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["month", "count"]).expect("in-memory write");
        for b in &self.buckets {
            w.write_record([b.month.to_string(), b.count.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Most frequent title lemmas among COVID-related documents, stopwords and
/// punctuation excluded.
pub fn title_word_frequencies(docs: &[Document], top_n: usize, pipeline: &TextPipeline) -> FrequencyTable {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for doc in filter_covid_docs(docs) {
        for token in tokenize(&doc.title) {
            if token.is_punctuation() {
                continue;
            }
            let lemma = pipeline.lemmatizer.lemma(&token.surface);
            if !pipeline.stopwords.contains(&lemma) {
                *counts.entry(lemma).or_default() += 1;
            }
        }
    }
    FrequencyTable::from_counts(counts).truncate(top_n)
}

/// Number of COVID-related documents mentioning each DISEASE key of the
/// gazetteer at least once. Keys never mentioned are listed with 0.
pub fn symptom_document_counts(docs: &[Document], gazetteer: &Gazetteer, pipeline: &TextPipeline) -> FrequencyTable {
    let per_doc: Vec<BTreeSet<String>> = filter_covid_docs(docs)
        .par_iter()
        .map(|doc| {
            pipeline
                .sentences(doc)
                .iter()
                .flat_map(|s| extract_entities(s, gazetteer))
                .filter(|e| e.category == EntityCategory::Disease)
                .map(|e| e.lemma_key)
                .collect()
        })
        .collect();
    let mut counts: BTreeMap<String, u64> = gazetteer
        .keys_of(EntityCategory::Disease)
        .into_iter()
        .map(|k| (k, 0))
        .collect();
    for keys in per_doc {
        for k in keys {
            *counts.entry(k).or_default() += 1;
        }
    }
    FrequencyTable::from_counts(counts)
}

/// Does any sentence of `doc` contain the lemma sequence `needle`?
fn mentions(doc: &Document, needle: &[String], pipeline: &TextPipeline) -> bool {
    pipeline.sentences(doc).iter().any(|s| {
        let lemmas: Vec<&str> = s.lemmas().collect();
        lemmas
            .windows(needle.len())
            .any(|w| w.iter().zip(needle).all(|(a, b)| *a == b))
    })
}

/// Per-month count of dated COVID-related documents mentioning `term`
/// (matched on lemmas). Buckets span the first to last month of the dated
/// COVID-related documents, gaps filled with zero.
pub fn monthly_trend(docs: &[Document], term: &str, pipeline: &TextPipeline) -> TrendSeries {
    let needle = pipeline.lemmatizer.lemmatize_phrase(term);
    let dated: Vec<(YearMonth, bool)> = filter_covid_docs(docs)
        .par_iter()
        .filter_map(|d| {
            let month = YearMonth::of(d.publish_date?);
            Some((month, !needle.is_empty() && mentions(d, &needle, pipeline)))
        })
        .collect();
    let term = term.trim().to_string();
    let (Some(first), Some(last)) = (
        dated.iter().map(|(m, _)| *m).min(),
        dated.iter().map(|(m, _)| *m).max(),
    ) else {
        return TrendSeries { term, buckets: Vec::new() };
    };
    let mut counts: BTreeMap<YearMonth, u64> = BTreeMap::new();
    let mut month = first;
    while month <= last {
        counts.insert(month, 0);
        month = month.next();
    }
    for (m, hit) in dated {
        if hit {
            *counts.get_mut(&m).expect("month within span") += 1;
        }
    }
    TrendSeries {
        term,
        buckets: counts.into_iter().map(|(month, count)| TrendBucket { month, count }).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn covid(id: &str, title: &str) -> Document {
        Document::new(id, title).with_abstract("A SARS-CoV-2 report.")
    }

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    #[test]
    fn title_words_hand_count() {
        let docs = [covid("a", "fever study"), covid("b", "fever and cough")];
        let t = title_word_frequencies(&docs, 10, &TextPipeline::default());
        let got: Vec<_> = t.entries.iter().map(|e| (e.term.as_str(), e.count)).collect();
        assert_eq!(got, [("fever", 2), ("cough", 1), ("study", 1)]);
    }

    #[test]
    fn title_words_ignore_non_covid_and_truncate() {
        let docs = [
            covid("a", "Fevers and coughs"),
            Document::new("b", "Influenza fever"),
        ];
        let t = title_word_frequencies(&docs, 1, &TextPipeline::default());
        assert_eq!(t.terms(), ["cough"]);
        assert!(title_word_frequencies(&[], 5, &TextPipeline::default()).is_empty());
    }

    #[test]
    fn symptom_counts_are_document_level() {
        let docs = [
            covid("a", "Fever, fever, fever, fever and fever"),
            covid("b", "Cough and fever"),
            Document::new("c", "Fever in influenza"),
        ];
        let t = symptom_document_counts(&docs, &Gazetteer::bundled(), &TextPipeline::default());
        assert_eq!(t.get("fever"), Some(2));
        assert_eq!(t.get("cough"), Some(1));
        assert_eq!(t.get("rash"), Some(0));
        assert_eq!(&t.terms()[..2], ["fever", "cough"]);
    }

    #[test]
    fn trend_gap_fill() {
        let mut docs = vec![covid("j", "Fever cases").with_date(date(2020, 1, 15))];
        for i in 0..4 {
            docs.push(covid(&format!("m{i}"), "Fever and cough").with_date(date(2020, 3, 1 + i)));
        }
        let s = monthly_trend(&docs, "fever", &TextPipeline::default());
        let got: Vec<_> = s.buckets.iter().map(|b| (b.month.to_string(), b.count)).collect();
        assert_eq!(got, [("2020-01".into(), 1), ("2020-02".into(), 0), ("2020-03".into(), 4)]);
        assert_eq!(s.to_csv(), "month,count\n2020-01,1\n2020-02,0\n2020-03,4\n");
    }

    #[test]
    fn trend_unmentioned_term_is_all_zero() {
        let docs = [
            covid("a", "Cough").with_date(date(2019, 12, 1)),
            covid("b", "Cough").with_date(date(2020, 2, 1)),
        ];
        let s = monthly_trend(&docs, "diarrhea", &TextPipeline::default());
        assert_eq!(s.counts(), [0, 0, 0]);
        assert_eq!(s.buckets[1].month, YearMonth::new(2020, 1));
    }

    #[test]
    fn trend_without_dates_is_empty() {
        let s = monthly_trend(&[covid("a", "fever")], "fever", &TextPipeline::default());
        assert!(s.buckets.is_empty());
    }

    #[test]
    fn trend_matches_inflections_and_phrases() {
        let docs = [
            covid("a", "Patients had fevers").with_date(date(2020, 4, 1)),
            covid("b", "Sore throats were rare").with_date(date(2020, 4, 2)),
        ];
        let p = TextPipeline::default();
        assert_eq!(monthly_trend(&docs, "Fever", &p).counts(), [1]);
        assert_eq!(monthly_trend(&docs, "sore throat", &p).counts(), [1]);
    }

    #[test]
    fn frequency_csv_and_json() {
        let t = FrequencyTable::from_counts([("b".to_string(), 1), ("a".to_string(), 1), ("c".to_string(), 5)]);
        assert_eq!(t.to_csv(), "term,count\nc,5\na,1\nb,1\n");
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"[{"term":"c","count":5},{"term":"a","count":1},{"term":"b","count":1}]"#
        );
    }

    #[test]
    fn year_month_rollover() {
        assert_eq!(YearMonth::new(2019, 12).next(), YearMonth::new(2020, 1));
        assert_eq!(YearMonth::new(2020, 3).to_string(), "2020-03");
    }
}
