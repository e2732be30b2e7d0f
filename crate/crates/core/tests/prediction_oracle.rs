//! Next-symptom prediction against a hand-computed three-patient cohort.

use chrono::{DateTime, TimeDelta, Utc};

use medchat_core::corpus::{load_corpus, CorpusFormat, TextPipeline};
use medchat_core::kg::{GraphBuilder, KnowledgeGraph, RelationPatterns};
use medchat_core::ner::Gazetteer;
use medchat_core::patient::{
    predict_next_symptoms, trajectory, PatientConfig, PatientEvent, PatientProfile, PredictionSource,
};

const QUERY_CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/query_corpus.jsonl");

fn graph() -> KnowledgeGraph {
    let docs = load_corpus(QUERY_CORPUS, CorpusFormat::Jsonl).unwrap().documents;
    let pipeline = TextPipeline::default();
    let gaz = Gazetteer::bundled();
    let rel = RelationPatterns::bundled();
    GraphBuilder::new(&pipeline, &gaz, &rel).build(&docs).0
}

fn profile(id: &str, sessions: &[&[&str]]) -> PatientProfile {
    let gap = TimeDelta::hours(1);
    let mut p = PatientProfile::new(id);
    for (i, symptoms) in sessions.iter().enumerate() {
        let at = DateTime::<Utc>::from_timestamp(1_600_000_000 + i as i64 * 86_400, 0).unwrap();
        for s in symptoms.iter() {
            p.record_event(PatientEvent::symptom(at, *s, *s), gap).unwrap();
        }
    }
    p
}

#[test]
fn three_patient_cohort() {
    let g = graph();
    let config = PatientConfig::default();
    let traj = |p: PatientProfile| trajectory(&p, &g, &config).unwrap();
    let bob = traj(profile("bob", &[&["fever"], &["fever", "cough"]]));
    let cohort = [
        traj(profile(
            "alice",
            &[&["fever"], &["fever", "cough"], &["cough", "low-normal procalcitonin"], &["lymphopenia"]],
        )),
        traj(profile(
            "carol",
            &[
                &["headache"],
                &["fever"],
                &["fever", "cough", "anosmia"],
                &["anosmia", "low-normal procalcitonin", "dyspnea"],
            ],
        )),
        traj(profile("dave", &[&["rash"], &["nausea"], &["lymphopenia"]])),
        // the target itself is never part of its own cohort
        traj(profile("bob", &[&["fever"], &["fever", "cough"], &["rash"]])),
    ];
    let got = predict_next_symptoms(&bob, &cohort, &g, 5, &config);

    // alice matches at 1.0, carol at 5/6, dave at 0 (below threshold)
    let want = [
        ("low-normal procalcitonin", 11.0 / 12.0, PredictionSource::Cohort),
        ("anosmia", 5.0 / 12.0, PredictionSource::Cohort),
        ("dyspnea", 5.0 / 12.0, PredictionSource::Cohort),
        ("diarrhea", 0.25, PredictionSource::Fringe),
    ];
    assert_eq!(got.len(), want.len(), "{got:?}");
    for (p, (key, score, source)) in got.iter().zip(want) {
        assert_eq!(p.lemma_key, key);
        assert!((p.score - score).abs() < 1e-12, "{key}: {}", p.score);
        assert_eq!(p.source, source);
    }
}

#[test]
fn k_truncates_cohort_votes() {
    let g = graph();
    let config = PatientConfig::default();
    let bob = trajectory(&profile("bob", &[&["fever"], &["fever", "cough"]]), &g, &config).unwrap();
    let alice = trajectory(
        &profile("alice", &[&["fever"], &["fever", "cough"], &["headache", "rash"]]),
        &g,
        &config,
    )
    .unwrap();
    let got = predict_next_symptoms(&bob, &[alice], &g, 1, &config);
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].lemma_key, "headache");
    assert_eq!(got[0].source, PredictionSource::Cohort);
}
