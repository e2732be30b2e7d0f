//! Conversation handling: intent classification, entity extraction from
//! patient messages, replies, and follow-up questions.
//!
//! The bot never advises. Dosage questions are answered with what the
//! literature graph observed, a pointer to an official guideline and the
//! supporting sentences; every reply passes a banned-phrase filter.

mod classifier;
mod colloquial;
mod templates;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::kg::{KgError, KnowledgeGraph, SentenceIndex};
use crate::ner::{extract_entities, Entity, EntityCategory, Gazetteer, NerError};
use crate::patient::{EventKind, EventSink, PatientError, PatientEvent, PatientProfile};

pub use classifier::{
    bundled_training_set, load_training_set, parse_training_set, IntentClassifier, TrainingExample,
    DEFAULT_INTENT_THRESHOLD,
};
pub use colloquial::{ColloquialRow, ColloquialTable};
pub use templates::{fill, SafetyFilter, Templates, TEMPLATE_SLOTS};

pub const DEFAULT_GUIDELINE_URL: &str = "https://www.who.int/emergencies/diseases/novel-coronavirus-2019";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IntentTag {
    Greet,
    Goodbye,
    Affirm,
    Deny,
    ReportSymptom,
    ReportDrug,
    FindDosage,
    AskInfo,
    OutOfScope,
}

impl IntentTag {
    pub const ALL: [IntentTag; 9] = [
        IntentTag::Greet,
        IntentTag::Goodbye,
        IntentTag::Affirm,
        IntentTag::Deny,
        IntentTag::ReportSymptom,
        IntentTag::ReportDrug,
        IntentTag::FindDosage,
        IntentTag::AskInfo,
        IntentTag::OutOfScope,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IntentTag::Greet => "GREET",
            IntentTag::Goodbye => "GOODBYE",
            IntentTag::Affirm => "AFFIRM",
            IntentTag::Deny => "DENY",
            IntentTag::ReportSymptom => "REPORT_SYMPTOM",
            IntentTag::ReportDrug => "REPORT_DRUG",
            IntentTag::FindDosage => "FIND_DOSAGE",
            IntentTag::AskInfo => "ASK_INFO",
            IntentTag::OutOfScope => "OUT_OF_SCOPE",
        }
    }
}

impl fmt::Display for IntentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IntentTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IntentTag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown intent {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intent {
    pub tag: IntentTag,
    /// Best cosine score, in [0, 1].
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsedMessage {
    pub intent: Intent,
    pub entities: Vec<Entity>,
    pub original_text: String,
    /// Attribute asked about by a FIND_DOSAGE message.
    pub requested_attribute: Option<EntityCategory>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recorded {
    pub kind: EventKind,
    pub lemma_key: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BotResponse {
    pub text: String,
    pub recorded: Vec<Recorded>,
    pub guideline_link: Option<String>,
    pub evidence_sentences: Option<Vec<String>>,
    /// Set when a patient event could not be persisted.
    #[serde(skip)]
    pub fault: Option<String>,
}

impl BotResponse {
    fn text(text: String) -> Self {
        BotResponse {
            text,
            recorded: Vec::new(),
            guideline_link: None,
            evidence_sentences: None,
            fault: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DialogueError {
    #[error("dialogue configuration error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {file}: {message}")]
    Parse { file: String, message: String },
    #[error(transparent)]
    Ner(#[from] NerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DialogueConfig {
    pub guideline_url: String,
    pub intent_threshold: f64,
    /// Literature sentences quoted with a dosage or info answer.
    pub max_evidence_sentences: usize,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        DialogueConfig {
            guideline_url: DEFAULT_GUIDELINE_URL.to_string(),
            intent_threshold: DEFAULT_INTENT_THRESHOLD,
            max_evidence_sentences: 3,
        }
    }
}

/// Data files behind the bot.
#[derive(Debug, Clone)]
pub struct DialogueResources {
    pub training_set: Vec<TrainingExample>,
    pub templates: Templates,
    pub safety: SafetyFilter,
    pub colloquial: ColloquialTable,
}

impl DialogueResources {
    pub fn bundled() -> Self {
        DialogueResources {
            training_set: bundled_training_set(),
            templates: Templates::bundled(),
            safety: SafetyFilter::bundled(),
            colloquial: ColloquialTable::bundled(),
        }
    }
}

/// Outcome of one chat message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatTurn {
    pub parsed: ParsedMessage,
    pub response: BotResponse,
    pub session_id: u64,
    /// The reply carries a follow-up question about the previous session.
    pub follow_up_pending: bool,
}

const FOLLOW_UP_PREFIX: &str = "You mentioned in our last conversation that you have symptoms of ";
const FOLLOW_UP_SUFFIX: &str = ". How do you feel about them now?";

/// Follow-up about the symptoms of the session before the current one, in
/// first-report order.
pub fn follow_up_question(profile: &PatientProfile) -> Option<String> {
    let symptoms = profile.previous_session()?.symptoms();
    if symptoms.is_empty() {
        return None;
    }
    Some(format!("{FOLLOW_UP_PREFIX}{}{FOLLOW_UP_SUFFIX}", symptoms.join(", ")))
}

/// Keyword phrases (as lemmas) that select the attribute of a dosage
/// question; the earliest phrase in the message wins, longer first.
const ATTRIBUTE_KEYWORDS: &[(&[&str], EntityCategory)] = &[
    (&["how", "many", "day"], EntityCategory::Duration),
    (&["how", "long"], EntityCategory::Duration),
    (&["duration"], EntityCategory::Duration),
    (&["how", "often"], EntityCategory::Frequency),
    (&["frequency"], EntityCategory::Frequency),
    (&["strength"], EntityCategory::Strength),
    (&["mg"], EntityCategory::Strength),
    (&["form"], EntityCategory::Form),
    (&["route"], EntityCategory::Route),
    (&["how", "much"], EntityCategory::Dosage),
    (&["how", "many"], EntityCategory::Dosage),
    (&["dosage"], EntityCategory::Dosage),
    (&["dose"], EntityCategory::Dosage),
];

/// Search order when the requested attribute has no value for the drug.
const ATTRIBUTE_FALLBACK: [EntityCategory; 6] = [
    EntityCategory::Dosage,
    EntityCategory::Duration,
    EntityCategory::Frequency,
    EntityCategory::Strength,
    EntityCategory::Form,
    EntityCategory::Route,
];

fn requested_attribute(lemmas: &[&str]) -> EntityCategory {
    for i in 0..lemmas.len() {
        for (phrase, category) in ATTRIBUTE_KEYWORDS {
            if lemmas[i..].starts_with(phrase) {
                return *category;
            }
        }
    }
    EntityCategory::Dosage
}

fn event_kind(category: EntityCategory) -> Option<EventKind> {
    match category {
        EntityCategory::Disease => Some(EventKind::Symptom),
        EntityCategory::Chemical => Some(EventKind::Drug),
        _ => None,
    }
}

pub struct Chatbot {
    gazetteer: Gazetteer,
    classifier: IntentClassifier,
    templates: Templates,
    safety: SafetyFilter,
    config: DialogueConfig,
}

impl Chatbot {
    /// Merges the colloquial table into `gazetteer` and trains the classifier.
    pub fn new(
        mut gazetteer: Gazetteer,
        resources: DialogueResources,
        config: DialogueConfig,
    ) -> Result<Self, DialogueError> {
        resources.colloquial.apply(&mut gazetteer)?;
        let classifier = IntentClassifier::train(&resources.training_set, gazetteer.clone(), config.intent_threshold)?;
        for (key, _) in TEMPLATE_SLOTS {
            for t in resources.templates.variants(key) {
                if let Some(p) = resources.safety.violations(t).first() {
                    return Err(DialogueError::Config(format!("template {key} contains banned phrase {p:?}")));
                }
            }
        }
        Ok(Chatbot {
            gazetteer,
            classifier,
            templates: resources.templates,
            safety: resources.safety,
            config,
        })
    }

    /// Bundled gazetteer, data files and default settings.
    pub fn bundled() -> Self {
        Self::new(Gazetteer::bundled(), DialogueResources::bundled(), DialogueConfig::default())
            .expect("bundled dialogue resources are valid")
    }

    pub fn config(&self) -> &DialogueConfig {
        &self.config
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn templates(&self) -> &Templates {
        &self.templates
    }

    pub fn safety(&self) -> &SafetyFilter {
        &self.safety
    }

    pub fn classify_intent(&self, text: &str) -> Intent {
        self.classifier.classify(text)
    }

    pub fn parse_message(&self, text: &str) -> ParsedMessage {
        let sentence = Sentence::from_text("chat", 0, text, self.gazetteer.lemmatizer());
        let entities = extract_entities(&sentence, &self.gazetteer);
        let mut intent = self.classifier.classify(text);
        // A message the classifier cannot place but that names a symptom or
        // drug is still a report.
        if intent.tag == IntentTag::OutOfScope {
            if entities.iter().any(|e| e.category == EntityCategory::Disease) {
                intent.tag = IntentTag::ReportSymptom;
            } else if entities.iter().any(|e| e.category == EntityCategory::Chemical) {
                intent.tag = IntentTag::ReportDrug;
            }
        }
        let requested_attribute = (intent.tag == IntentTag::FindDosage).then(|| {
            let lemmas: Vec<&str> = sentence.lemmas().collect();
            requested_attribute(&lemmas)
        });
        ParsedMessage {
            intent,
            entities,
            original_text: text.to_string(),
            requested_attribute,
        }
    }

    fn render(&self, key: &str, seed: &str, slots: &[(&str, &str)]) -> String {
        self.templates.render(key, seed, slots)
    }

    /// Replaces unsafe text with the fallback reply.
    fn guard(&self, mut response: BotResponse, seed: &str) -> BotResponse {
        let violations = self.safety.violations(&response.text);
        if !violations.is_empty() {
            tracing::warn!(?violations, "reply blocked by safety filter");
            response.text = self.render("SAFE_FALLBACK", seed, &[]);
        }
        response
    }

    /// Produces the reply to a parsed message, recording symptom and drug
    /// mentions of REPORT messages into `sink`.
    pub fn respond(
        &self,
        parsed: &ParsedMessage,
        patient_id: &str,
        sink: &mut dyn EventSink,
        graph: &KnowledgeGraph,
        evidence: Option<&SentenceIndex>,
        at: DateTime<Utc>,
    ) -> BotResponse {
        let seed = parsed.original_text.as_str();
        let response = match parsed.intent.tag {
            IntentTag::ReportSymptom | IntentTag::ReportDrug => self.record(parsed, patient_id, sink, at),
            IntentTag::FindDosage => self.answer_dosage(parsed, graph, evidence),
            IntentTag::AskInfo => self.answer_info(parsed, graph, evidence),
            IntentTag::Greet => BotResponse::text(self.render("GREET", seed, &[])),
            IntentTag::Goodbye => BotResponse::text(self.render("GOODBYE", seed, &[])),
            IntentTag::Affirm => BotResponse::text(self.render("AFFIRM", seed, &[])),
            IntentTag::Deny => BotResponse::text(self.render("DENY", seed, &[])),
            IntentTag::OutOfScope => BotResponse::text(self.render("OUT_OF_SCOPE", seed, &[])),
        };
        self.guard(response, seed)
    }

    fn record(
        &self,
        parsed: &ParsedMessage,
        patient_id: &str,
        sink: &mut dyn EventSink,
        at: DateTime<Utc>,
    ) -> BotResponse {
        let seed = parsed.original_text.as_str();
        let mut recorded = Vec::new();
        for e in &parsed.entities {
            let Some(kind) = event_kind(e.category) else { continue };
            let event = PatientEvent {
                timestamp: at,
                kind,
                lemma_key: e.lemma_key.clone(),
                raw_text: e.surface.clone(),
            };
            if let Err(err) = sink.record(patient_id, event) {
                tracing::error!(patient_id, error = %err, "failed to record patient event");
                let mut r = BotResponse::text(self.render("STORE_ERROR", seed, &[]));
                r.recorded = recorded;
                r.fault = Some(err.to_string());
                return r;
            }
            recorded.push(Recorded {
                kind,
                lemma_key: e.lemma_key.clone(),
            });
        }
        if recorded.is_empty() {
            return BotResponse::text(self.render("REPORT_NOTHING", seed, &[]));
        }
        let list = |kind: EventKind| {
            recorded
                .iter()
                .filter(|r| r.kind == kind)
                .map(|r| r.lemma_key.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut parts = Vec::new();
        for (kind, key) in [(EventKind::Symptom, "SYMPTOM_RECORDED"), (EventKind::Drug, "DRUG_RECORDED")] {
            let items = list(kind);
            if !items.is_empty() {
                parts.push(self.render(key, seed, &[("items", &items)]));
            }
        }
        parts.push(self.render("REPORT_COMFORT", seed, &[]));
        let mut r = BotResponse::text(parts.join(" "));
        r.recorded = recorded;
        r
    }

    fn quote(&self, refs: &[crate::kg::EvidenceRef], index: Option<&SentenceIndex>) -> Option<Vec<String>> {
        let index = index?;
        Some(
            refs.iter()
                .filter_map(|r| index.get(r))
                .take(self.config.max_evidence_sentences)
                .map(str::to_string)
                .collect(),
        )
    }

    fn answer_dosage(
        &self,
        parsed: &ParsedMessage,
        graph: &KnowledgeGraph,
        evidence: Option<&SentenceIndex>,
    ) -> BotResponse {
        let seed = parsed.original_text.as_str();
        let link = self.config.guideline_url.as_str();
        let Some(drug) = parsed.entities.iter().find(|e| e.category == EntityCategory::Chemical) else {
            return BotResponse::text(self.render("DOSAGE_NO_DRUG", seed, &[]));
        };
        let requested = parsed.requested_attribute.unwrap_or(EntityCategory::Dosage);
        let order = std::iter::once(requested).chain(ATTRIBUTE_FALLBACK.into_iter().filter(|c| *c != requested));
        let mut found = None;
        for category in order {
            match graph.query_attribute(&drug.lemma_key, category) {
                Ok(values) if !values.is_empty() => {
                    found = Some((category, values.into_iter().next().expect("non-empty")));
                    break;
                }
                Ok(_) => {}
                Err(KgError::UnknownDrug(_)) => break,
                Err(e) => {
                    tracing::warn!(error = %e, "attribute query failed");
                    break;
                }
            }
        }
        let mut response = match found {
            Some((category, top)) => {
                let category_name = category.as_str().to_lowercase();
                let mut r = BotResponse::text(self.render(
                    "DOSAGE_FOUND",
                    seed,
                    &[
                        ("drug", &drug.lemma_key),
                        ("category", &category_name),
                        ("value", &top.value),
                        ("count", &top.count.to_string()),
                        ("link", link),
                    ],
                ));
                r.evidence_sentences = self.quote(&top.evidence, evidence);
                r
            }
            None => BotResponse::text(self.render("DOSAGE_NOT_FOUND", seed, &[("drug", &drug.lemma_key), ("link", link)])),
        };
        response.guideline_link = Some(link.to_string());
        response
    }

    fn answer_info(
        &self,
        parsed: &ParsedMessage,
        graph: &KnowledgeGraph,
        evidence: Option<&SentenceIndex>,
    ) -> BotResponse {
        let seed = parsed.original_text.as_str();
        let link = self.config.guideline_url.as_str();
        let Some(entity) = parsed.entities.iter().find(|e| event_kind(e.category).is_some()) else {
            return BotResponse::text(self.render("INFO_NO_ENTITY", seed, &[]));
        };
        let key = entity.lemma_key.as_str();
        let mut edges: Vec<_> = graph
            .semantic_edges()
            .filter(|e| e.subject == key || e.object == key)
            .collect();
        edges.sort_by(|a, b| b.count.cmp(&a.count));
        let mut facts: Vec<String> = edges
            .iter()
            .take(3)
            .map(|e| format!("{} → {} ({})", e.subject, e.object, e.descriptor))
            .collect();
        let refs: Vec<_> = edges.iter().flat_map(|e| e.evidence.iter().cloned()).collect();
        if facts.is_empty() {
            if let Ok(neighbors) = graph.neighbors(key, 3, None) {
                if !neighbors.is_empty() {
                    let names: Vec<&str> = neighbors.iter().map(|n| n.lemma_key.as_str()).collect();
                    facts.push(format!("it is often mentioned together with {}", names.join(", ")));
                }
            }
        }
        let mut response = if facts.is_empty() {
            BotResponse::text(self.render("INFO_NOT_FOUND", seed, &[("entity", key), ("link", link)]))
        } else {
            let mut r = BotResponse::text(self.render(
                "INFO_FOUND",
                seed,
                &[("entity", key), ("facts", &facts.join("; ")), ("link", link)],
            ));
            if !refs.is_empty() {
                r.evidence_sentences = self.quote(&refs, evidence);
            }
            r
        };
        response.guideline_link = Some(link.to_string());
        response
    }

    /// Greeting for a (re)connecting patient, with the follow-up question
    /// when the previous session recorded symptoms. Opens or extends the
    /// session at `at`.
    pub fn start_conversation(
        &self,
        patient_id: &str,
        sink: &mut dyn EventSink,
        at: DateTime<Utc>,
    ) -> Result<(BotResponse, u64), PatientError> {
        let session_id = sink.touch(patient_id, at)?;
        let mut text = self.render("GREET", patient_id, &[]);
        if let Some(q) = sink.profile(patient_id).as_ref().and_then(follow_up_question) {
            text.push(' ');
            text.push_str(&q);
        }
        Ok((self.guard(BotResponse::text(text), patient_id), session_id))
    }

    /// One full chat turn: registers activity, parses, responds. The first
    /// message of a new session also carries the follow-up question.
    pub fn chat(
        &self,
        patient_id: &str,
        text: &str,
        sink: &mut dyn EventSink,
        graph: &KnowledgeGraph,
        evidence: Option<&SentenceIndex>,
        at: DateTime<Utc>,
    ) -> Result<ChatTurn, PatientError> {
        let before = sink
            .profile(patient_id)
            .and_then(|p| p.current_session().map(|s| s.session_id));
        let session_id = sink.touch(patient_id, at)?;
        let parsed = self.parse_message(text);
        let mut response = self.respond(&parsed, patient_id, sink, graph, evidence, at);
        let mut follow_up_pending = false;
        if before != Some(session_id) {
            if let Some(q) = sink.profile(patient_id).as_ref().and_then(follow_up_question) {
                response.text.push(' ');
                response.text.push_str(&q);
                follow_up_pending = true;
            }
        }
        Ok(ChatTurn {
            parsed,
            response,
            session_id,
            follow_up_pending,
        })
    }
}
