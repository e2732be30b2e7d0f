//! Per-session subgraphs, fringe ranking and next-symptom prediction.
//!
//! Prediction looks for cohort members whose history resembles the target's.
//! For a member with steps `m[0..L]`, every position `p` that has a successor
//! is tried: the target is end-aligned against the prefix `m[0..=p]` and the
//! mean per-step Jaccard is taken. The best `p` (earliest on ties) is the
//! member's alignment. Members at or above the similarity threshold vote for
//! the symptoms of `m[p+1]`, weighted by their similarity:
//!
//! ```text
//! score(s) = Σ_{matching m with s in next(m)} sim(m) / #matching
//! ```
//!
//! which is mean similarity times frequency among matching members. Remaining
//! slots are filled from the fringe of the target's last step.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PatientConfig, PatientError, PatientProfile, Session};
use crate::kg::KnowledgeGraph;
use crate::ner::EntityCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FringeAggregator {
    /// Highest `P(candidate | s)` over the sources.
    Max,
    /// Mean of `P(candidate | s)` over the sources present in the graph.
    Mean,
}

impl FromStr for FringeAggregator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "max" => Ok(FringeAggregator::Max),
            "mean" => Ok(FringeAggregator::Mean),
            other => Err(format!("unknown fringe aggregator {other:?} (expected max or mean)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeEntry {
    pub lemma_key: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub session_id: u64,
    pub symptoms: BTreeSet<String>,
    pub drugs: BTreeSet<String>,
    pub fringe: Vec<FringeEntry>,
}

impl TrajectoryStep {
    /// Items compared between trajectories.
    fn items(&self, include_drugs: bool) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.symptoms.iter().map(String::as_str).collect();
        if include_drugs {
            out.extend(self.drugs.iter().map(String::as_str));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub patient_id: String,
    pub steps: Vec<TrajectoryStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PredictionSource {
    Cohort,
    Fringe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub lemma_key: String,
    pub score: f64,
    pub source: PredictionSource,
}

fn by_score_then_key(a: &(String, f64), b: &(String, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// DISEASE neighbors of `sources` not in `sources`, scored by the aggregator
/// over `P(candidate | s)`. Sources missing from the graph add nothing.
pub fn rank_fringe(
    sources: &BTreeSet<String>,
    graph: &KnowledgeGraph,
    k: usize,
    aggregator: FringeAggregator,
) -> Vec<FringeEntry> {
    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    let mut present = 0usize;
    for s in sources {
        let Ok(neighbors) = graph.neighbors(s, usize::MAX, Some(EntityCategory::Disease)) else {
            continue;
        };
        present += 1;
        for n in neighbors.into_iter().filter(|n| !sources.contains(&n.lemma_key)) {
            let slot = scores.entry(n.lemma_key).or_insert(0.0);
            match aggregator {
                FringeAggregator::Max => *slot = slot.max(n.probability),
                FringeAggregator::Mean => *slot += n.probability,
            }
        }
    }
    let mut ranked: Vec<(String, f64)> = scores.into_iter().collect();
    if aggregator == FringeAggregator::Mean {
        for (_, score) in &mut ranked {
            *score /= present as f64;
        }
    }
    ranked.sort_by(by_score_then_key);
    ranked
        .into_iter()
        .take(k)
        .map(|(lemma_key, score)| FringeEntry { lemma_key, score })
        .collect()
}

fn step_of(session: &Session, graph: &KnowledgeGraph, config: &PatientConfig) -> TrajectoryStep {
    let symptoms: BTreeSet<String> = session.symptoms().into_iter().map(String::from).collect();
    let drugs: BTreeSet<String> = session.drugs().into_iter().map(String::from).collect();
    let mut sources = symptoms.clone();
    if config.include_drugs {
        sources.extend(drugs.iter().cloned());
    }
    let fringe = rank_fringe(&sources, graph, config.fringe_k, config.aggregator)
        .into_iter()
        .filter(|f| !symptoms.contains(&f.lemma_key))
        .collect();
    TrajectoryStep {
        session_id: session.session_id,
        symptoms,
        drugs,
        fringe,
    }
}

/// The patient's subgraph for one session: reported keys plus their fringe.
pub fn build_subgraph(
    profile: &PatientProfile,
    session_id: u64,
    graph: &KnowledgeGraph,
    config: &PatientConfig,
) -> Result<TrajectoryStep, PatientError> {
    let session = profile
        .session(session_id)
        .ok_or_else(|| PatientError::SessionNotFound {
            patient_id: profile.patient_id.clone(),
            session_id,
        })?;
    Ok(step_of(session, graph, config))
}

/// One step per session that recorded at least one event; `None` when there
/// is no such session.
pub fn trajectory(profile: &PatientProfile, graph: &KnowledgeGraph, config: &PatientConfig) -> Option<Trajectory> {
    let steps: Vec<TrajectoryStep> = profile
        .sessions
        .iter()
        .filter(|s| !s.events.is_empty())
        .map(|s| step_of(s, graph, config))
        .collect();
    (!steps.is_empty()).then(|| Trajectory {
        patient_id: profile.patient_id.clone(),
        steps,
    })
}

fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Mean Jaccard over the last `min(|a|, |b|)` steps, aligned at the end.
fn aligned_similarity(a: &[BTreeSet<&str>], b: &[BTreeSet<&str>]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    let (a, b) = (&a[a.len() - n..], &b[b.len() - n..]);
    a.iter().zip(b).map(|(x, y)| jaccard(x, y)).sum::<f64>() / n as f64
}

fn item_sets(t: &Trajectory, include_drugs: bool) -> Vec<BTreeSet<&str>> {
    t.steps.iter().map(|s| s.items(include_drugs)).collect()
}

/// End-aligned mean per-step Jaccard of the symptom sets, in [0, 1].
pub fn trajectory_similarity(a: &Trajectory, b: &Trajectory) -> f64 {
    aligned_similarity(&item_sets(a, false), &item_sets(b, false))
}

/// Ranked next-symptom candidates for `target`: cohort votes first, then the
/// fringe of the target's last step. Symptoms the target already reported in
/// any step are never suggested. Cohort members with the target's patient id
/// are ignored.
pub fn predict_next_symptoms(
    target: &Trajectory,
    cohort: &[Trajectory],
    graph: &KnowledgeGraph,
    k: usize,
    config: &PatientConfig,
) -> Vec<Prediction> {
    let Some(last) = target.steps.last() else {
        return Vec::new();
    };
    let reported: BTreeSet<&str> = target.steps.iter().flat_map(|s| s.symptoms.iter().map(String::as_str)).collect();
    let target_sets = item_sets(target, config.include_drugs);

    let mut votes: BTreeMap<&str, f64> = BTreeMap::new();
    let mut matching = 0usize;
    for member in cohort.iter().filter(|m| m.patient_id != target.patient_id) {
        let sets = item_sets(member, config.include_drugs);
        let mut best: Option<(usize, f64)> = None;
        for p in 0..sets.len().saturating_sub(1) {
            let sim = aligned_similarity(&target_sets, &sets[..=p]);
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((p, sim));
            }
        }
        let Some((p, sim)) = best.filter(|&(_, sim)| sim >= config.similarity_threshold) else {
            continue;
        };
        matching += 1;
        for s in &member.steps[p + 1].symptoms {
            if !reported.contains(s.as_str()) {
                *votes.entry(s).or_insert(0.0) += sim;
            }
        }
    }

    let mut cohort_ranked: Vec<(String, f64)> = votes
        .into_iter()
        .map(|(s, total)| (s.to_string(), total / matching as f64))
        .collect();
    cohort_ranked.sort_by(by_score_then_key);

    let mut out: Vec<Prediction> = cohort_ranked
        .into_iter()
        .take(k)
        .map(|(lemma_key, score)| Prediction {
            lemma_key,
            score,
            source: PredictionSource::Cohort,
        })
        .collect();
    if out.len() < k {
        let mut sources = last.symptoms.clone();
        if config.include_drugs {
            sources.extend(last.drugs.iter().cloned());
        }
        let fill: Vec<Prediction> = rank_fringe(&sources, graph, usize::MAX, config.aggregator)
            .into_iter()
            .filter(|f| !reported.contains(f.lemma_key.as_str()) && !out.iter().any(|p| p.lemma_key == f.lemma_key))
            .take(k - out.len())
            .map(|f| Prediction {
                lemma_key: f.lemma_key,
                score: f.score,
                source: PredictionSource::Fringe,
            })
            .collect();
        out.extend(fill);
    }
    out
}
