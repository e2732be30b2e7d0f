//! Service settings.
//!
//! Precedence, lowest first: built-in defaults, the TOML file, then
//! `MEDCHAT_<KEY>` environment variables (`MEDCHAT_PORT=8081`). Unknown keys
//! in the file are rejected by name.

use std::path::{Path, PathBuf};

use chrono::TimeDelta;
use serde::Deserialize;

use medchat_core::dialogue::{DialogueConfig, DEFAULT_GUIDELINE_URL};
use medchat_core::patient::PatientConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("invalid value for {var}: {message}")]
    Env { var: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub host: String,
    /// 0 picks a free port.
    pub port: u16,
    /// Directory for the event log and patient snapshots.
    pub data_dir: PathBuf,
    /// Graph file written by `medchat ingest`.
    pub graph_path: Option<PathBuf>,
    /// Corpus the graph was built from; enables evidence sentences in answers.
    pub corpus_path: Option<PathBuf>,
    pub guideline_url: String,
    pub session_gap_seconds: i64,
    pub intent_threshold: f64,
    pub similarity_threshold: f64,
    /// Predictions scoring at or above this set the `alert` flag.
    pub alert_threshold: f64,
    /// Logged operations between snapshot compactions.
    pub compact_every: usize,
    pub cors_origin: Option<String>,
    /// Web UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            data_dir: PathBuf::from("data"),
            graph_path: None,
            corpus_path: None,
            guideline_url: DEFAULT_GUIDELINE_URL.into(),
            session_gap_seconds: medchat_core::patient::DEFAULT_SESSION_GAP_SECONDS,
            intent_threshold: medchat_core::dialogue::DEFAULT_INTENT_THRESHOLD,
            similarity_threshold: 0.5,
            alert_threshold: 0.8,
            compact_every: 1000,
            cors_origin: None,
            static_dir: None,
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Str,
    Int,
    Float,
}

const KEYS: [(&str, Kind); 13] = [
    ("host", Kind::Str),
    ("port", Kind::Int),
    ("data_dir", Kind::Str),
    ("graph_path", Kind::Str),
    ("corpus_path", Kind::Str),
    ("guideline_url", Kind::Str),
    ("session_gap_seconds", Kind::Int),
    ("intent_threshold", Kind::Float),
    ("similarity_threshold", Kind::Float),
    ("alert_threshold", Kind::Float),
    ("compact_every", Kind::Int),
    ("cors_origin", Kind::Str),
    ("static_dir", Kind::Str),
];

impl ServiceConfig {
    /// Reads `path` (if any) and applies environment overrides from the
    /// process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                path: p.display().to_string(),
                source,
            })?,
            None => String::new(),
        };
        Self::from_parts(&text, std::env::vars())
    }

    /// `toml_text` layered under `env` (only `MEDCHAT_*` names are read).
    pub fn from_parts(
        toml_text: &str,
        env: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ConfigError> {
        let mut table: toml::Table = toml::from_str(toml_text).map_err(|e| ConfigError::Invalid(e.message().into()))?;
        for (var, value) in env {
            let Some(key) = var.strip_prefix("MEDCHAT_") else {
                continue;
            };
            let key = key.to_ascii_lowercase();
            let Some(&(name, kind)) = KEYS.iter().find(|(k, _)| *k == key) else {
                continue;
            };
            let bad = |message: String| ConfigError::Env {
                var: var.clone(),
                message,
            };
            let value = match kind {
                Kind::Str => toml::Value::String(value),
                Kind::Int => toml::Value::Integer(value.trim().parse().map_err(|e| bad(format!("{e}")))?),
                Kind::Float => toml::Value::Float(value.trim().parse().map_err(|e| bad(format!("{e}")))?),
            };
            table.insert(name.to_string(), value);
        }
        let config: ServiceConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Invalid(e.message().into()))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        unit("intent_threshold", self.intent_threshold)?;
        unit("similarity_threshold", self.similarity_threshold)?;
        unit("alert_threshold", self.alert_threshold)?;
        if self.session_gap_seconds <= 0 {
            return Err(ConfigError::Invalid("session_gap_seconds must be positive".into()));
        }
        if self.compact_every == 0 {
            return Err(ConfigError::Invalid("compact_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn session_gap(&self) -> TimeDelta {
        TimeDelta::seconds(self.session_gap_seconds)
    }

    pub fn dialogue(&self) -> DialogueConfig {
        DialogueConfig {
            guideline_url: self.guideline_url.clone(),
            intent_threshold: self.intent_threshold,
            ..DialogueConfig::default()
        }
    }

    pub fn patient(&self) -> PatientConfig {
        PatientConfig {
            session_gap: self.session_gap(),
            similarity_threshold: self.similarity_threshold,
            ..PatientConfig::default()
        }
    }
}
