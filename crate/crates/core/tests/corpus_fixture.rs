use medchat_core::corpus::{
    filter_covid_docs, load_corpus, remove_stopwords, split_sentences, CorpusError, CorpusFormat, Document,
    TextPipeline,
};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/corpus.jsonl");
const MALFORMED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/corpus_malformed.jsonl");

fn docs() -> Vec<Document> {
    load_corpus(CORPUS, CorpusFormat::Jsonl).unwrap().documents
}

#[test]
fn fixture_loads_all_twenty() {
    let loaded = load_corpus(CORPUS, CorpusFormat::Jsonl).unwrap();
    assert_eq!(loaded.documents.len(), 20);
    assert!(loaded.report.skipped.is_empty());
}

#[test]
fn malformed_fixture_skips_two() {
    let loaded = load_corpus(MALFORMED, CorpusFormat::Jsonl).unwrap();
    assert_eq!(loaded.documents.len(), 18);
    assert_eq!(loaded.report.loaded, 18);
    assert_eq!(loaded.report.skipped.len(), 2);
}

#[test]
fn empty_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    std::fs::write(&path, "").unwrap();
    assert!(matches!(
        load_corpus(&path, CorpusFormat::Jsonl),
        Err(CorpusError::EmptyCorpus { .. })
    ));
    assert!(matches!(
        load_corpus(dir.path().join("missing.jsonl"), CorpusFormat::Jsonl),
        Err(CorpusError::Io { .. })
    ));
}

#[test]
fn covid_filter_keeps_hand_labelled_twelve() {
    let kept: Vec<String> = filter_covid_docs(&docs()).into_iter().map(|d| d.doc_id).collect();
    // hand-labelled: c01..c12 mention a keyword, n01..n08 do not
    let want: Vec<String> = (1..=12).map(|i| format!("c{i:02}")).collect();
    assert_eq!(kept, want);
}

#[test]
fn abbreviation_abstract_matches_gold_count() {
    let doc = docs().into_iter().find(|d| d.doc_id == "c04").unwrap();
    let abstract_only = Document::new("c04", "").with_abstract(doc.abstract_text.clone());
    let sentences = split_sentences(&abstract_only);
    // gold: "Symptoms varied, e.g. ... in Wuhan." / "Dr. Smith ... cohort." / "A dry cough often followed."
    let texts: Vec<&str> = sentences.iter().map(|s| s.text.as_str()).collect();
    assert_eq!(
        texts,
        [
            "Symptoms varied, e.g. fever and loss of smell, as noted by Li et al. in Wuhan.",
            "Dr. Smith reported similar cases in Fig. 2 of the cohort.",
            "A dry cough often followed.",
        ]
    );
}

#[test]
fn thirty_token_sentence_has_seventeen_content_tokens() {
    let doc = docs().into_iter().find(|d| d.doc_id == "c03").unwrap();
    let pipeline = TextPipeline::default();
    let sentence = pipeline
        .sentences(&doc)
        .into_iter()
        .find(|s| s.text.starts_with("Many older patients"))
        .unwrap();
    assert_eq!(sentence.tokens.len(), 30);
    let content = remove_stopwords(sentence.tokens.clone(), &pipeline.stopwords);
    let surfaces: Vec<&str> = content.iter().map(|t| t.surface.as_str()).collect();
    // hand count against the bundled lexicon
    assert_eq!(
        surfaces,
        [
            "Many", "older", "patients", "cohort", "persistent", "fever", "dry", "cough", "mild", "diarrhea",
            "none", "required", "intensive", "care", "hospital", "March", "2020"
        ]
    );
}

#[test]
fn sentences_partition_every_document() {
    let pipeline = TextPipeline::default();
    for doc in docs() {
        let full = doc.full_text();
        let mut last_end = 0;
        for s in pipeline.sentences(&doc) {
            assert!(!s.text.trim().is_empty());
            assert!(s.offset >= last_end, "{}: overlapping sentences", doc.doc_id);
            assert_eq!(&full[s.offset..s.offset + s.text.len()], s.text);
            for t in &s.tokens {
                assert_eq!(&s.text[t.start..t.end], t.surface);
            }
            last_end = s.offset + s.text.len();
        }
        // whatever lies between sentences is whitespace
        let covered: usize = pipeline.sentences(&doc).iter().map(|s| s.text.len()).sum();
        let non_ws = full.chars().filter(|c| !c.is_whitespace()).count();
        let non_ws_covered: usize = pipeline
            .sentences(&doc)
            .iter()
            .map(|s| s.text.chars().filter(|c| !c.is_whitespace()).count())
            .sum();
        assert!(covered <= full.len());
        assert_eq!(non_ws, non_ws_covered, "{}", doc.doc_id);
    }
}
