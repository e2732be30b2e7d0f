//! Graph counts checked against an independent brute-force recount over the
//! fixture corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use medchat_core::corpus::{filter_covid_docs, load_corpus, CorpusFormat, Document, Sentence, TextPipeline};
use medchat_core::kg::{export_graph, import_graph, GraphBuilder, KnowledgeGraph, RelationPatterns};
use medchat_core::ner::{extract_entities, Entity, EntityCategory, Gazetteer};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/corpus.jsonl");

fn docs() -> Vec<Document> {
    load_corpus(CORPUS, CorpusFormat::Jsonl).unwrap().documents
}

fn tagged_sentences(docs: &[Document]) -> Vec<(Sentence, Vec<Entity>)> {
    let pipeline = TextPipeline::default();
    let gaz = Gazetteer::bundled();
    docs.iter()
        .flat_map(|d| pipeline.sentences(d))
        .map(|s| {
            let e = extract_entities(&s, &gaz);
            (s, e)
        })
        .collect()
}

struct Oracle {
    mentions: BTreeMap<String, u64>,
    sentences: BTreeMap<String, u64>,
    pairs: BTreeMap<(String, String), u64>,
    total: u64,
}

/// O(sentences x keys^2) recount: every key pair is tested against every
/// sentence's key list by linear search.
fn oracle(tagged: &[(Sentence, Vec<Entity>)]) -> Oracle {
    let keys: BTreeSet<String> = tagged.iter().flat_map(|(_, es)| es.iter().map(|e| e.lemma_key.clone())).collect();
    let lists: Vec<Vec<&str>> = tagged
        .iter()
        .map(|(_, es)| es.iter().map(|e| e.lemma_key.as_str()).collect())
        .collect();
    let mut o = Oracle {
        mentions: BTreeMap::new(),
        sentences: BTreeMap::new(),
        pairs: BTreeMap::new(),
        total: tagged.len() as u64,
    };
    for k in &keys {
        let m = lists.iter().map(|l| l.iter().filter(|x| *x == k).count() as u64).sum();
        let s = lists.iter().filter(|l| l.contains(&k.as_str())).count() as u64;
        o.mentions.insert(k.clone(), m);
        o.sentences.insert(k.clone(), s);
    }
    for a in &keys {
        for b in &keys {
            if a < b {
                let c = lists
                    .iter()
                    .filter(|l| l.contains(&a.as_str()) && l.contains(&b.as_str()))
                    .count() as u64;
                if c > 0 {
                    o.pairs.insert((a.clone(), b.clone()), c);
                }
            }
        }
    }
    o
}

fn build(docs: &[Document]) -> KnowledgeGraph {
    let pipeline = TextPipeline::default();
    let gaz = Gazetteer::bundled();
    let rel = RelationPatterns::bundled();
    GraphBuilder::new(&pipeline, &gaz, &rel).build(docs).0
}

#[test]
fn counts_equal_brute_force() {
    let started = Instant::now();
    let docs = docs();
    let tagged = tagged_sentences(&docs);
    assert!(tagged.len() <= 500);
    let g = build(&docs);
    let o = oracle(&tagged);

    assert_eq!(g.total_sentences(), o.total);
    assert_eq!(g.node_count(), o.sentences.len());
    for node in g.nodes() {
        assert_eq!(node.mention_count, o.mentions[&node.lemma_key], "{}", node.lemma_key);
        assert_eq!(node.sentence_count, o.sentences[&node.lemma_key], "{}", node.lemma_key);
    }
    let edges: BTreeMap<(String, String), u64> = g.cooccurrence_edges().map(|e| ((e.a, e.b), e.count)).collect();
    assert_eq!(edges, o.pairs);
    assert!(started.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn fever_diarrhea_against_oracle() {
    let docs = docs();
    let g = build(&docs);
    let o = oracle(&tagged_sentences(&docs));
    let pair = o.pairs[&("diarrhea".to_string(), "fever".to_string())];
    assert_eq!(g.edge_weight("fever", "diarrhea"), pair);
    assert_eq!(
        g.conditional_ratio("fever", "diarrhea").unwrap(),
        Ratio::new(pair, o.sentences["diarrhea"])
    );
}

#[test]
fn neighbors_of_fever_match_oracle_ranking() {
    let docs = docs();
    let g = build(&docs);
    let o = oracle(&tagged_sentences(&docs));
    let mut want: Vec<(String, u64)> = o
        .pairs
        .iter()
        .filter_map(|((a, b), &c)| match (a.as_str(), b.as_str()) {
            ("fever", other) | (other, "fever") => Some((other.to_string(), c)),
            _ => None,
        })
        .collect();
    want.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    want.truncate(3);
    let got: Vec<(String, u64)> = g
        .neighbors("fever", 3, None)
        .unwrap()
        .into_iter()
        .map(|n| (n.lemma_key, n.count))
        .collect();
    assert_eq!(got, want);
}

#[test]
fn conditional_identity_over_all_pairs() {
    let g = build(&docs());
    let nodes: Vec<_> = g.nodes().cloned().collect();
    for a in &nodes {
        for b in nodes.iter().filter(|b| b.lemma_key != a.lemma_key) {
            let count = g.edge_weight(&a.lemma_key, &b.lemma_key);
            let ab = g.conditional_ratio(&a.lemma_key, &b.lemma_key).unwrap() * b.sentence_count;
            let ba = g.conditional_ratio(&b.lemma_key, &a.lemma_key).unwrap() * a.sentence_count;
            assert_eq!(ab, Ratio::from_integer(count));
            assert_eq!(ba, Ratio::from_integer(count));
        }
    }
}

#[test]
fn permutations_export_identically() {
    let docs = docs();
    let tagged = tagged_sentences(&docs);
    let rel = RelationPatterns::bundled();
    let ingest = |order: &[usize]| {
        let mut g = KnowledgeGraph::new();
        for &i in order {
            let (s, e) = &tagged[i];
            g.add_sentence(s, e);
            for edge in medchat_core::kg::extract_semantic_edges(s, e, &rel) {
                g.add_semantic_edge(edge);
            }
        }
        export_graph(&g)
    };
    let mut order: Vec<usize> = (0..tagged.len()).collect();
    let reference = ingest(&order);
    assert_eq!(reference, export_graph(&build(&docs)));
    let mut rng = rand::rngs::StdRng::seed_from_u64(20200301);
    for _ in 0..10 {
        order.shuffle(&mut rng);
        assert_eq!(ingest(&order), reference);
    }
}

#[test]
fn fixture_graph_round_trips() {
    let g = build(&docs());
    assert!(g.semantic_edges().count() > 0);
    assert!(g.attribute_edges().count() > 0);
    assert_eq!(import_graph(&export_graph(&g)).unwrap(), g);
}

#[test]
fn worked_examples_on_fixture() {
    let g = build(&docs());
    let v = g.query_attribute("magnesium hydroxide", EntityCategory::Duration).unwrap();
    assert_eq!(v[0].value, "5 days");
    assert_eq!(v[0].count, 1);
    let symptom: Vec<_> = g
        .semantic_edges()
        .filter(|e| e.subject == "headache" && e.object == "covid-19")
        .map(|e| e.descriptor.as_str())
        .collect();
    assert_eq!(symptom, ["symptom"]);
}

#[test]
fn covid_only_graph_uses_twelve_docs() {
    let docs = docs();
    let covid = filter_covid_docs(&docs);
    let g = build(&covid);
    let o = oracle(&tagged_sentences(&covid));
    assert_eq!(g.total_sentences(), o.total);
    for node in g.nodes() {
        assert_eq!(node.sentence_count, o.sentences[&node.lemma_key]);
    }
    // influenza-only drugs drop out
    assert!(g.node("oseltamivir").is_none());
    assert!(build(&docs).node("oseltamivir").is_some());
}
