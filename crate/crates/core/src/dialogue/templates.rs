//! Response templates and the banned-phrase safety filter.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use super::DialogueError;

const BUNDLED_TEMPLATES: &str = include_str!("../../data/templates.json");
const BUNDLED_BANNED: &str = include_str!("../../data/banned_phrases.txt");

static PLACEHOLDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{([a-z_]+)\}").unwrap());

/// Every template key the dialogue uses, with the slots it may reference.
pub const TEMPLATE_SLOTS: &[(&str, &[&str])] = &[
    ("GREET", &[]),
    ("GOODBYE", &[]),
    ("AFFIRM", &[]),
    ("DENY", &[]),
    ("OUT_OF_SCOPE", &[]),
    ("SYMPTOM_RECORDED", &["items"]),
    ("DRUG_RECORDED", &["items"]),
    ("REPORT_COMFORT", &[]),
    ("REPORT_NOTHING", &[]),
    ("DOSAGE_FOUND", &["drug", "category", "value", "count", "link"]),
    ("DOSAGE_NOT_FOUND", &["drug", "link"]),
    ("DOSAGE_NO_DRUG", &[]),
    ("INFO_FOUND", &["entity", "facts", "link"]),
    ("INFO_NOT_FOUND", &["entity", "link"]),
    ("INFO_NO_ENTITY", &[]),
    ("STORE_ERROR", &[]),
    ("SAFE_FALLBACK", &[]),
];

/// Stable 64-bit FNV-1a, used to pick a template variant deterministically.
fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    map: BTreeMap<String, Vec<String>>,
}

impl Templates {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DialogueError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DialogueError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses `{"KEY": ["template", ...], ...}`. Every key in
    /// [`TEMPLATE_SLOTS`] must be present with at least one template, and
    /// templates may only use that key's slots.
    pub fn parse(json: &str) -> Result<Self, DialogueError> {
        let map: BTreeMap<String, Vec<String>> = serde_json::from_str(json).map_err(|e| DialogueError::Parse {
            file: "templates".into(),
            message: e.to_string(),
        })?;
        for (key, slots) in TEMPLATE_SLOTS {
            let list = map
                .get(*key)
                .filter(|l| !l.is_empty())
                .ok_or_else(|| DialogueError::Config(format!("templates: missing {key}")))?;
            for t in list {
                for cap in PLACEHOLDER.captures_iter(t) {
                    if !slots.contains(&&cap[1]) {
                        return Err(DialogueError::Config(format!(
                            "templates: {key} uses unknown slot {{{}}}",
                            &cap[1]
                        )));
                    }
                }
            }
        }
        if let Some(extra) = map.keys().find(|k| !TEMPLATE_SLOTS.iter().any(|(t, _)| t == k)) {
            return Err(DialogueError::Config(format!("templates: unknown key {extra}")));
        }
        Ok(Templates { map })
    }

    pub fn variants(&self, key: &str) -> &[String] {
        self.map.get(key).map_or(&[], Vec::as_slice)
    }

    /// Picks a variant by hashing `seed`, then fills the slots.
    pub fn render(&self, key: &str, seed: &str, slots: &[(&str, &str)]) -> String {
        let variants = self.variants(key);
        assert!(!variants.is_empty(), "template key {key} was validated at load");
        let t = &variants[(fnv1a(seed) % variants.len() as u64) as usize];
        fill(t, slots)
    }
}

pub fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    PLACEHOLDER
        .replace_all(template, |cap: &regex::Captures| {
            slots
                .iter()
                .find(|(k, _)| *k == &cap[1])
                .map_or_else(|| cap[0].to_string(), |(_, v)| v.to_string())
        })
        .into_owned()
}

fn collapse(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Rejects replies containing a banned prescriptive phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyFilter {
    phrases: Vec<String>,
}

impl SafetyFilter {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_BANNED)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DialogueError> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map(|t| Self::parse(&t))
            .map_err(|source| DialogueError::Io {
                path: path.display().to_string(),
                source,
            })
    }

    pub fn parse(text: &str) -> Self {
        let phrases = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(collapse)
            .collect();
        SafetyFilter { phrases }
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    /// Banned phrases found in `text` (case-insensitive, whitespace-collapsed).
    pub fn violations(&self, text: &str) -> Vec<&str> {
        let t = collapse(text);
        self.phrases
            .iter()
            .filter(|p| t.contains(p.as_str()))
            .map(String::as_str)
            .collect()
    }

    pub fn is_safe(&self, text: &str) -> bool {
        self.violations(text).is_empty()
    }
}
