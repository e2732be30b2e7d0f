use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use super::{EventSink, PatientError, PatientEvent, PatientProfile, DEFAULT_SESSION_GAP_SECONDS};

pub const STORE_SCHEMA_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoreFile {
    schema_version: String,
    patients: Vec<PatientProfile>,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<serde_json::Value>,
}

/// In-memory profile store keyed by patient id.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientStore {
    profiles: BTreeMap<String, PatientProfile>,
    session_gap: TimeDelta,
}

impl Default for PatientStore {
    fn default() -> Self {
        Self::new(TimeDelta::seconds(DEFAULT_SESSION_GAP_SECONDS))
    }
}

fn parse_error(e: serde_json::Error) -> PatientError {
    PatientError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

impl PatientStore {
    pub fn new(session_gap: TimeDelta) -> Self {
        PatientStore {
            profiles: BTreeMap::new(),
            session_gap,
        }
    }

    pub fn session_gap(&self) -> TimeDelta {
        self.session_gap
    }

    pub fn get(&self, patient_id: &str) -> Option<&PatientProfile> {
        self.profiles.get(patient_id)
    }

    pub fn profiles(&self) -> impl Iterator<Item = &PatientProfile> {
        self.profiles.values()
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Replaces (or adds) a whole profile.
    pub fn insert(&mut self, profile: PatientProfile) {
        self.profiles.insert(profile.patient_id.clone(), profile);
    }

    fn entry(&mut self, patient_id: &str) -> Result<&mut PatientProfile, PatientError> {
        if patient_id.is_empty() {
            return Err(PatientError::EmptyPatientId);
        }
        Ok(self
            .profiles
            .entry(patient_id.to_string())
            .or_insert_with(|| PatientProfile::new(patient_id)))
    }

    pub fn touch(&mut self, patient_id: &str, at: DateTime<Utc>) -> Result<u64, PatientError> {
        let gap = self.session_gap;
        self.entry(patient_id)?.touch(at, gap)
    }

    /// Records an event, creating the profile on first contact.
    pub fn record_event(&mut self, patient_id: &str, event: PatientEvent) -> Result<u64, PatientError> {
        let gap = self.session_gap;
        self.entry(patient_id)?.record_event(event, gap)
    }

    pub fn to_json(&self) -> String {
        let file = StoreFile {
            schema_version: STORE_SCHEMA_VERSION.to_string(),
            patients: self.profiles.values().cloned().collect(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("store serializes");
        out.push('\n');
        out
    }

    pub fn from_json(json: &str, session_gap: TimeDelta) -> Result<Self, PatientError> {
        let probe: VersionProbe = serde_json::from_str(json).map_err(parse_error)?;
        let found = match probe.schema_version {
            Some(serde_json::Value::String(s)) => s,
            Some(other) => other.to_string(),
            None => "<missing>".to_string(),
        };
        if found != STORE_SCHEMA_VERSION {
            return Err(PatientError::Version {
                found,
                expected: STORE_SCHEMA_VERSION.to_string(),
            });
        }
        let file: StoreFile = serde_json::from_str(json).map_err(parse_error)?;
        let mut store = PatientStore::new(session_gap);
        for p in file.patients {
            store.insert(p);
        }
        Ok(store)
    }

    /// Writes the snapshot via a temporary file and rename.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PatientError> {
        let path = path.as_ref();
        let io = |source| PatientError::Io {
            path: path.display().to_string(),
            source,
        };
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, self.to_json()).map_err(io)?;
        std::fs::rename(&tmp, path).map_err(io)
    }

    pub fn load(path: impl AsRef<Path>, session_gap: TimeDelta) -> Result<Self, PatientError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| PatientError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, session_gap)
    }
}

impl EventSink for PatientStore {
    fn touch(&mut self, patient_id: &str, at: DateTime<Utc>) -> Result<u64, PatientError> {
        PatientStore::touch(self, patient_id, at)
    }

    fn record(&mut self, patient_id: &str, event: PatientEvent) -> Result<u64, PatientError> {
        self.record_event(patient_id, event)
    }

    fn profile(&self, patient_id: &str) -> Option<PatientProfile> {
        self.get(patient_id).cloned()
    }
}
