use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::corpus::Lemmatizer;
use crate::ner::{extract_entities, Gazetteer};

use EntityCategory::*;

fn sentence(doc: &str, index: usize) -> Sentence {
    Sentence {
        doc_id: doc.into(),
        index,
        offset: 0,
        text: String::new(),
        tokens: vec![],
    }
}

/// Entities laid out left to right, 10 bytes apart.
fn ents(specs: &[(&str, EntityCategory)]) -> Vec<Entity> {
    specs
        .iter()
        .enumerate()
        .map(|(i, &(key, category))| Entity {
            surface: key.into(),
            lemma_key: key.into(),
            category,
            doc_id: "d".into(),
            sentence_index: 0,
            start: i * 10,
            end: i * 10 + 5,
        })
        .collect()
}

#[test]
fn all_pairs_of_three() {
    let mut g = KnowledgeGraph::new();
    g.add_sentence(&sentence("d", 0), &ents(&[("fever", Disease), ("cough", Disease), ("remdesivir", Chemical)]));
    assert_eq!(g.edge_weight("fever", "cough"), 1);
    assert_eq!(g.edge_weight("cough", "fever"), 1);
    assert_eq!(g.edge_weight("fever", "remdesivir"), 1);
    assert_eq!(g.edge_weight("cough", "remdesivir"), 1);
    assert_eq!(g.cooccurrence_count(), 3);
    assert_eq!(g.total_sentences(), 1);
}

#[test]
fn repeated_mention_counts_once_per_sentence() {
    let mut g = KnowledgeGraph::new();
    g.add_sentence(&sentence("d", 0), &ents(&[("fever", Disease), ("fever", Disease)]));
    let n = g.node("fever").unwrap();
    assert_eq!((n.mention_count, n.sentence_count), (2, 1));
    assert_eq!(g.edge_weight("fever", "fever"), 0);
    assert_eq!(g.cooccurrence_count(), 0);
}

#[test]
fn attribute_edge_from_drug_and_duration() {
    let mut g = KnowledgeGraph::new();
    g.add_sentence(&sentence("d", 0), &ents(&[("magnesium hydroxide", Chemical), ("5 days", Duration)]));
    let values = g.query_attribute("magnesium hydroxide", Duration).unwrap();
    assert_eq!(values.len(), 1);
    assert_eq!(values[0].value, "5 days");
    assert_eq!(values[0].count, 1);
    assert_eq!(values[0].evidence, [EvidenceRef { doc_id: "d".into(), sentence_index: 0 }]);
}

#[test]
fn nearest_drug_gets_the_attribute() {
    let mut g = KnowledgeGraph::new();
    // remdesivir(0) 5 days(10) ... heparin(20) 500 mg(30)
    g.add_sentence(
        &sentence("d", 0),
        &ents(&[("remdesivir", Chemical), ("5 days", Duration), ("heparin", Chemical), ("500 mg", Strength)]),
    );
    // "5 days" is 5 bytes from both drugs; the earlier one wins
    assert_eq!(g.query_attribute("remdesivir", Duration).unwrap()[0].value, "5 days");
    assert!(g.query_attribute("heparin", Duration).unwrap().is_empty());
    assert_eq!(g.query_attribute("heparin", Strength).unwrap()[0].value, "500 mg");
    assert!(g.query_attribute("remdesivir", Strength).unwrap().is_empty());
}

#[test]
fn edge_weight_accumulates() {
    let mut g = KnowledgeGraph::new();
    for i in 0..3 {
        g.add_sentence(&sentence("d", i), &ents(&[("fever", Disease), ("cough", Disease)]));
    }
    assert_eq!(g.edge_weight("fever", "cough"), 3);
    assert_eq!(g.edge_weight("fever", "unknown"), 0);
}

/// fever+cough ×3, cough alone ×1, diarrhea+cough ×0 ... used by several tests.
fn cough_graph() -> KnowledgeGraph {
    let mut g = KnowledgeGraph::new();
    for i in 0..3 {
        g.add_sentence(&sentence("d", i), &ents(&[("fever", Disease), ("cough", Disease)]));
    }
    g.add_sentence(&sentence("d", 3), &ents(&[("cough", Disease)]));
    g.add_sentence(&sentence("d", 4), &ents(&[("diarrhea", Disease)]));
    g
}

#[test]
fn conditional_probability_examples() {
    let g = cough_graph();
    assert_eq!(g.conditional_probability("fever", "cough").unwrap(), 0.75);
    assert_eq!(g.conditional_ratio("fever", "cough").unwrap(), Ratio::new(3, 4));
    assert_eq!(g.conditional_probability("diarrhea", "cough").unwrap(), 0.0);
    assert_eq!(g.conditional_probability("cough", "fever").unwrap(), 1.0);
    assert_eq!(g.conditional_probability("cough", "cough").unwrap(), 1.0);
    assert!(matches!(
        g.conditional_probability("fever", "nothing"),
        Err(KgError::UndefinedConditional(_))
    ));
}

#[test]
fn neighbors_ranking() {
    let g = cough_graph();
    let n = g.neighbors("cough", 1, None).unwrap();
    assert_eq!(n.len(), 1);
    assert_eq!((n[0].lemma_key.as_str(), n[0].probability), ("fever", 0.75));
    assert_eq!(g.neighbors("cough", 10, None).unwrap().len(), 1);
    assert!(g.neighbors("diarrhea", 3, None).unwrap().is_empty());
    assert!(g.neighbors("fever", 3, Some(Chemical)).unwrap().is_empty());
    assert!(matches!(g.neighbors("zzz", 1, None), Err(KgError::UnknownNode(_))));
}

#[test]
fn neighbor_ties_are_lexicographic() {
    let mut g = KnowledgeGraph::new();
    g.add_sentence(&sentence("d", 0), &ents(&[("fever", Disease), ("zeta", Disease), ("alpha", Disease)]));
    let keys: Vec<_> = g.neighbors("fever", 5, None).unwrap().into_iter().map(|n| n.lemma_key).collect();
    assert_eq!(keys, ["alpha", "zeta"]);
}

#[test]
fn query_attribute_ranking_and_errors() {
    let mut g = KnowledgeGraph::new();
    for i in 0..3 {
        g.add_sentence(&sentence("d", i), &ents(&[("magnesium hydroxide", Chemical), ("5 days", Duration)]));
    }
    g.add_sentence(&sentence("e", 0), &ents(&[("magnesium hydroxide", Chemical), ("7 days", Duration)]));
    g.add_sentence(&sentence("e", 1), &ents(&[("fever", Disease)]));
    let got: Vec<_> = g
        .query_attribute("magnesium hydroxide", Duration)
        .unwrap()
        .into_iter()
        .map(|v| (v.value, v.count))
        .collect();
    assert_eq!(got, [("5 days".to_string(), 3), ("7 days".to_string(), 1)]);
    assert!(g.query_attribute("magnesium hydroxide", Frequency).unwrap().is_empty());
    assert!(matches!(g.query_attribute("fever", Duration), Err(KgError::UnknownDrug(_))));
    assert!(matches!(g.query_attribute("aspirin", Duration), Err(KgError::UnknownDrug(_))));
    assert!(matches!(
        g.query_attribute("magnesium hydroxide", Disease),
        Err(KgError::NotAnAttribute(Disease))
    ));
}

#[test]
fn evidence_is_capped_but_count_exact() {
    let mut g = KnowledgeGraph::new();
    for i in (0..30).rev() {
        g.add_sentence(&sentence("d", i), &ents(&[("heparin", Chemical), ("2 doses", Dosage)]));
    }
    let v = &g.query_attribute("heparin", Dosage).unwrap()[0];
    assert_eq!(v.count, 30);
    assert_eq!(v.evidence.len(), EVIDENCE_CAP);
    assert_eq!(v.evidence[0].sentence_index, 0);
    assert_eq!(v.evidence.last().unwrap().sentence_index, 19);
}

#[test]
fn semantic_edge_requires_nodes() {
    let mut g = KnowledgeGraph::new();
    g.add_semantic_edge(SemanticEdge {
        subject: "a".into(),
        object: "b".into(),
        descriptor: "x".into(),
        count: 1,
        evidence: Evidence::from_iter([EvidenceRef { doc_id: "d".into(), sentence_index: 0 }]),
    });
    assert_eq!(g.semantic_edges().count(), 0);
}

fn four_kind_graph() -> KnowledgeGraph {
    let gaz = Gazetteer::bundled();
    let relations = RelationPatterns::bundled();
    let mut g = KnowledgeGraph::new();
    let texts = [
        "A headache is a symptom of COVID-19.",
        "Magnesium hydroxide was given for 5 days.",
        "Fever and cough were reported with headache.",
    ];
    for (i, text) in texts.iter().enumerate() {
        let s = Sentence::from_text("fx", i, *text, gaz.lemmatizer());
        let e = extract_entities(&s, &gaz);
        g.add_sentence(&s, &e);
        for edge in extract_semantic_edges(&s, &e, &relations) {
            g.add_semantic_edge(edge);
        }
    }
    g
}

#[test]
fn export_import_round_trip() {
    let empty = KnowledgeGraph::new();
    assert_eq!(import_graph(&export_graph(&empty)).unwrap(), empty);

    let g = four_kind_graph();
    assert!(g.node_count() > 0);
    assert!(g.cooccurrence_count() > 0);
    assert_eq!(g.semantic_edges().count(), 1);
    assert_eq!(g.attribute_edges().count(), 1);
    let json = export_graph(&g);
    let back = import_graph(&json).unwrap();
    assert_eq!(back, g);
    assert_eq!(export_graph(&back), json);
}

#[test]
fn import_rejects_unknown_version() {
    let json = export_graph(&KnowledgeGraph::new()).replace("\"schema_version\": \"1\"", "\"schema_version\": \"99\"");
    match import_graph(&json) {
        Err(KgError::Version { found, .. }) => assert_eq!(found, "99"),
        other => panic!("expected version error, got {other:?}"),
    }
}

#[test]
fn import_reports_parse_location() {
    let json = "{\n  \"schema_version\": \"1\",\n  \"nodes\": [ oops ]\n}";
    match import_graph(json) {
        Err(KgError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn import_rejects_dangling_edges() {
    let json = r#"{"schema_version":"1","nodes":[],"cooccurrence":[{"a":"a","b":"b","count":1}],
        "semantic":[],"attributes":[],"total_sentences":1}"#;
    assert!(matches!(import_graph(json), Err(KgError::Invalid(_))));
}

// ---- brute-force oracle -------------------------------------------------

/// Independent recount: per sentence, the set of keys present.
struct Oracle {
    sentences: Vec<(Vec<String>, BTreeSet<String>)>,
}

impl Oracle {
    fn new(corpus: &[Vec<Entity>]) -> Self {
        Oracle {
            sentences: corpus
                .iter()
                .map(|es| {
                    let all: Vec<String> = es.iter().map(|e| e.lemma_key.clone()).collect();
                    let set = all.iter().cloned().collect();
                    (all, set)
                })
                .collect(),
        }
    }

    fn sentence_count(&self, k: &str) -> u64 {
        self.sentences.iter().filter(|(_, s)| s.contains(k)).count() as u64
    }

    fn mention_count(&self, k: &str) -> u64 {
        self.sentences.iter().map(|(all, _)| all.iter().filter(|x| *x == k).count() as u64).sum()
    }

    fn pair(&self, a: &str, b: &str) -> u64 {
        if a == b {
            return 0;
        }
        self.sentences.iter().filter(|(_, s)| s.contains(a) && s.contains(b)).count() as u64
    }
}

const KEYS: [(&str, EntityCategory); 6] = [
    ("fever", Disease),
    ("cough", Disease),
    ("diarrhea", Disease),
    ("anosmia", Disease),
    ("remdesivir", Chemical),
    ("5 days", Duration),
];

fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(0..KEYS.len(), 0..6), 0..40)
}

fn build(corpus: &[Vec<usize>]) -> (KnowledgeGraph, Vec<Vec<Entity>>) {
    let mut g = KnowledgeGraph::new();
    let mut all = Vec::new();
    for (i, idxs) in corpus.iter().enumerate() {
        let specs: Vec<_> = idxs.iter().map(|&j| KEYS[j]).collect();
        let e = ents(&specs);
        g.add_sentence(&sentence("p", i), &e);
        all.push(e);
    }
    (g, all)
}

proptest! {
    #[test]
    fn counts_match_brute_force(corpus in corpus_strategy()) {
        let (g, entities) = build(&corpus);
        let oracle = Oracle::new(&entities);
        prop_assert_eq!(g.total_sentences(), corpus.len() as u64);
        for (a, _) in KEYS {
            match g.node(a) {
                Some(n) => {
                    prop_assert_eq!(n.sentence_count, oracle.sentence_count(a));
                    prop_assert_eq!(n.mention_count, oracle.mention_count(a));
                    prop_assert!(n.sentence_count <= n.mention_count);
                }
                None => prop_assert_eq!(oracle.sentence_count(a), 0),
            }
            for (b, _) in KEYS {
                prop_assert_eq!(g.edge_weight(a, b), oracle.pair(a, b));
            }
        }
    }

    #[test]
    fn conditional_symmetry_identity(corpus in corpus_strategy()) {
        let (g, _) = build(&corpus);
        let keys: Vec<String> = g.nodes().map(|n| n.lemma_key.clone()).collect();
        for a in &keys {
            for b in keys.iter().filter(|b| *b != a) {
                let p_ab = g.conditional_ratio(a, b).unwrap();
                let p_ba = g.conditional_ratio(b, a).unwrap();
                let count = g.edge_weight(a, b);
                prop_assert_eq!(p_ab * g.node(b).unwrap().sentence_count, Ratio::from_integer(count));
                prop_assert_eq!(p_ba * g.node(a).unwrap().sentence_count, Ratio::from_integer(count));
                let p = g.conditional_probability(a, b).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                let all_b_have_a = count == g.node(b).unwrap().sentence_count;
                prop_assert_eq!(p == 1.0, all_b_have_a);
            }
        }
    }

    #[test]
    fn merge_is_commutative_and_associative(
        x in corpus_strategy(), y in corpus_strategy(), z in corpus_strategy()
    ) {
        let (gx, _) = build(&x);
        let (gy, _) = build(&y);
        let (gz, _) = build(&z);
        let xy = gx.clone().merged(gy.clone());
        let yx = gy.clone().merged(gx.clone());
        prop_assert_eq!(&xy, &yx);
        let left = xy.merged(gz.clone());
        let right = gx.merged(gy.merged(gz));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn sentence_order_does_not_matter(corpus in corpus_strategy(), seed in any::<u64>()) {
        let (g, _) = build(&corpus);
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        // Fisher-Yates with a small LCG so the permutation depends on `seed`
        let mut state = seed;
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let mut h = KnowledgeGraph::new();
        for &i in &order {
            let specs: Vec<_> = corpus[i].iter().map(|&j| KEYS[j]).collect();
            h.add_sentence(&sentence("p", i), &ents(&specs));
        }
        prop_assert_eq!(export_graph(&g), export_graph(&h));
    }
}

#[test]
fn lemmatizer_shared_with_gazetteer() {
    // graph keys for inflected mentions collapse onto one node
    let gaz = Gazetteer::bundled();
    let s = Sentence::from_text("d", 0, "Fevers, fever and FEVER.", &Lemmatizer::bundled());
    let e = extract_entities(&s, &gaz);
    let mut g = KnowledgeGraph::new();
    g.add_sentence(&s, &e);
    assert_eq!(g.node_count(), 1);
    assert_eq!(g.node("fever").unwrap().mention_count, 3);
}
