//! Patient profiles: session-structured time series of reported symptoms and
//! drugs, plus trajectories over the knowledge graph.
//!
//! A session is a run of chat activity. Activity at least `session_gap`
//! (default one hour) after the previous activity opens a new session, so gaps
//! of 3599 s stay in one session while 3600 s and 3601 s split.

mod store;
mod trajectory;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

pub use store::{PatientStore, STORE_SCHEMA_VERSION};
pub use trajectory::{
    build_subgraph, predict_next_symptoms, rank_fringe, trajectory, trajectory_similarity, FringeAggregator,
    FringeEntry, Prediction, PredictionSource, Trajectory, TrajectoryStep,
};

/// Default inactivity gap that closes a session.
pub const DEFAULT_SESSION_GAP_SECONDS: i64 = 3600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Symptom,
    Drug,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Symptom => "SYMPTOM",
            EventKind::Drug => "DRUG",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientEvent {
    pub timestamp: DateTime<Utc>,
    pub kind: EventKind,
    pub lemma_key: String,
    pub raw_text: String,
}

impl PatientEvent {
    pub fn symptom(timestamp: DateTime<Utc>, lemma_key: impl Into<String>, raw_text: impl Into<String>) -> Self {
        PatientEvent {
            timestamp,
            kind: EventKind::Symptom,
            lemma_key: lemma_key.into(),
            raw_text: raw_text.into(),
        }
    }

    pub fn drug(timestamp: DateTime<Utc>, lemma_key: impl Into<String>, raw_text: impl Into<String>) -> Self {
        PatientEvent {
            kind: EventKind::Drug,
            ..Self::symptom(timestamp, lemma_key, raw_text)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Session {
    pub session_id: u64,
    pub start: DateTime<Utc>,
    /// Last activity in the session (an event or any other chat turn).
    pub end: DateTime<Utc>,
    pub events: Vec<PatientEvent>,
}

impl Session {
    /// Distinct keys of one kind in first-report order.
    pub fn keys(&self, kind: EventKind) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in self.events.iter().filter(|e| e.kind == kind) {
            if !out.contains(&e.lemma_key.as_str()) {
                out.push(&e.lemma_key);
            }
        }
        out
    }

    pub fn symptoms(&self) -> Vec<&str> {
        self.keys(EventKind::Symptom)
    }

    pub fn drugs(&self) -> Vec<&str> {
        self.keys(EventKind::Drug)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientProfile {
    pub patient_id: String,
    pub sessions: Vec<Session>,
}

#[derive(Debug, thiserror::Error)]
pub enum PatientError {
    #[error("event for {patient_id} at {got} is earlier than its last activity at {last}")]
    OutOfOrder {
        patient_id: String,
        last: DateTime<Utc>,
        got: DateTime<Utc>,
    },
    #[error("patient {patient_id} has no session {session_id}")]
    SessionNotFound { patient_id: String, session_id: u64 },
    #[error("unknown patient {0:?}")]
    UnknownPatient(String),
    #[error("patient id must be non-empty")]
    EmptyPatientId,
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("patient store parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported patient store schema version {found} (expected {expected})")]
    Version { found: String, expected: String },
    #[error("could not persist patient data: {0}")]
    Persistence(String),
}

impl PatientProfile {
    pub fn new(patient_id: impl Into<String>) -> Self {
        PatientProfile {
            patient_id: patient_id.into(),
            sessions: Vec::new(),
        }
    }

    pub fn last_activity(&self) -> Option<DateTime<Utc>> {
        self.sessions.last().map(|s| s.end)
    }

    /// Registers chat activity at `at`, opening a new session when the gap
    /// since the last activity is at least `gap`. Returns the session id.
    pub fn touch(&mut self, at: DateTime<Utc>, gap: TimeDelta) -> Result<u64, PatientError> {
        match self.sessions.last_mut() {
            Some(last) if at < last.end => Err(PatientError::OutOfOrder {
                patient_id: self.patient_id.clone(),
                last: last.end,
                got: at,
            }),
            Some(last) if at - last.end < gap => {
                last.end = at;
                Ok(last.session_id)
            }
            _ => {
                let session_id = self.sessions.last().map_or(1, |s| s.session_id + 1);
                self.sessions.push(Session {
                    session_id,
                    start: at,
                    end: at,
                    events: Vec::new(),
                });
                Ok(session_id)
            }
        }
    }

    /// Appends the event to the current session or a fresh one.
    pub fn record_event(&mut self, event: PatientEvent, gap: TimeDelta) -> Result<u64, PatientError> {
        let id = self.touch(event.timestamp, gap)?;
        self.sessions.last_mut().expect("touch opened a session").events.push(event);
        Ok(id)
    }

    pub fn session(&self, session_id: u64) -> Option<&Session> {
        self.sessions.iter().find(|s| s.session_id == session_id)
    }

    pub fn current_session(&self) -> Option<&Session> {
        self.sessions.last()
    }

    /// The session before the current one.
    pub fn previous_session(&self) -> Option<&Session> {
        self.sessions.len().checked_sub(2).map(|i| &self.sessions[i])
    }

    pub fn event_count(&self) -> usize {
        self.sessions.iter().map(|s| s.events.len()).sum()
    }
}

/// Receives patient events; implemented by the in-memory store and by the
/// service's durable store.
pub trait EventSink {
    /// Marks activity without an event (greetings, questions).
    fn touch(&mut self, patient_id: &str, at: DateTime<Utc>) -> Result<u64, PatientError>;
    fn record(&mut self, patient_id: &str, event: PatientEvent) -> Result<u64, PatientError>;
    fn profile(&self, patient_id: &str) -> Option<PatientProfile>;
}

/// Settings shared by sessionization, trajectories and prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientConfig {
    pub session_gap: TimeDelta,
    /// Count drugs alongside symptoms in similarity and fringe sources.
    pub include_drugs: bool,
    pub aggregator: FringeAggregator,
    /// Minimum trajectory similarity for a cohort member to count.
    pub similarity_threshold: f64,
    /// Fringe length stored on each trajectory step.
    pub fringe_k: usize,
}

impl Default for PatientConfig {
    fn default() -> Self {
        PatientConfig {
            session_gap: TimeDelta::seconds(DEFAULT_SESSION_GAP_SECONDS),
            include_drugs: false,
            aggregator: FringeAggregator::Max,
            similarity_threshold: 0.5,
            fringe_k: 5,
        }
    }
}
