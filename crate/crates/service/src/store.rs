//! Crash-safe patient store: in-memory profiles backed by an append-only
//! event log plus periodic snapshots.
//!
//! On disk, `data_dir` holds `snapshot-<g>.json` files (patient-store JSON)
//! and `events-<g>.jsonl` logs. Snapshot `g` contains everything logged in
//! generations below `g`. Recovery loads the newest snapshot and replays the
//! logs from its generation on. Compaction first opens log `g+1`, then writes
//! snapshot `g+1`, then deletes older files, so a crash at any point
//! recovers without loss or double application.
//!
//! Each committed request is one log line, written and fsynced before the
//! caller replies. A torn final line (crash mid-write) was never
//! acknowledged and is dropped on replay.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::OwnedMutexGuard;

use medchat_core::patient::{EventSink, PatientError, PatientEvent, PatientProfile, PatientStore};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("store I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt log {path} line {line}: {message}")]
    CorruptLog { path: String, line: usize, message: String },
    #[error(transparent)]
    Patient(#[from] PatientError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LogOp {
    Touch(DateTime<Utc>),
    Event(PatientEvent),
}

#[derive(Debug, Serialize, Deserialize)]
struct LogRecord {
    patient_id: String,
    ops: Vec<LogOp>,
}

fn apply(store: &mut PatientStore, record: &LogRecord) -> Result<(), PatientError> {
    for op in &record.ops {
        match op {
            LogOp::Touch(at) => store.touch(&record.patient_id, *at)?,
            LogOp::Event(e) => store.record_event(&record.patient_id, e.clone())?,
        };
    }
    Ok(())
}

/// Working copy of one patient for the duration of a request. Changes reach
/// the shared store only through [`DurableStore::commit`].
pub struct PatientTx {
    patient_id: String,
    scratch: PatientStore,
    ops: Vec<LogOp>,
    _guard: OwnedMutexGuard<()>,
}

impl PatientTx {
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn profile(&self) -> Option<&PatientProfile> {
        self.scratch.get(&self.patient_id)
    }

    fn check(&self, patient_id: &str) -> Result<(), PatientError> {
        if patient_id == self.patient_id {
            Ok(())
        } else {
            Err(PatientError::Persistence(format!(
                "transaction for {:?} cannot write {patient_id:?}",
                self.patient_id
            )))
        }
    }
}

impl EventSink for PatientTx {
    fn touch(&mut self, patient_id: &str, at: DateTime<Utc>) -> Result<u64, PatientError> {
        self.check(patient_id)?;
        let id = self.scratch.touch(patient_id, at)?;
        self.ops.push(LogOp::Touch(at));
        Ok(id)
    }

    fn record(&mut self, patient_id: &str, event: PatientEvent) -> Result<u64, PatientError> {
        self.check(patient_id)?;
        let id = self.scratch.record_event(patient_id, event.clone())?;
        self.ops.push(LogOp::Event(event));
        Ok(id)
    }

    fn profile(&self, patient_id: &str) -> Option<PatientProfile> {
        self.scratch.get(patient_id).cloned()
    }
}

struct LogWriter {
    generation: u64,
    path: PathBuf,
    file: File,
    ops_since_compaction: usize,
}

pub struct DurableStore {
    dir: PathBuf,
    session_gap: TimeDelta,
    compact_every: usize,
    committed: RwLock<PatientStore>,
    log: Mutex<LogWriter>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

fn generation_of(name: &str, prefix: &str, suffix: &str) -> Option<u64> {
    name.strip_prefix(prefix)?.strip_suffix(suffix)?.parse().ok()
}

fn log_path(dir: &Path, g: u64) -> PathBuf {
    dir.join(format!("events-{g}.jsonl"))
}

fn snapshot_path(dir: &Path, g: u64) -> PathBuf {
    dir.join(format!("snapshot-{g}.json"))
}

fn open_log(path: &Path) -> Result<File, StoreError> {
    OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))
}

fn sync_dir(dir: &Path) -> Result<(), StoreError> {
    File::open(dir).and_then(|d| d.sync_all()).map_err(io_err(dir))
}

impl DurableStore {
    /// Opens (creating if needed) the store in `dir` and replays it.
    pub fn open(dir: impl Into<PathBuf>, session_gap: TimeDelta, compact_every: usize) -> Result<Self, StoreError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut snapshots = Vec::new();
        let mut logs = Vec::new();
        for entry in std::fs::read_dir(&dir).map_err(io_err(&dir))? {
            let name = entry.map_err(io_err(&dir))?.file_name().to_string_lossy().into_owned();
            if let Some(g) = generation_of(&name, "snapshot-", ".json") {
                snapshots.push(g);
            } else if let Some(g) = generation_of(&name, "events-", ".jsonl") {
                logs.push(g);
            }
        }
        let base = snapshots.iter().copied().max().unwrap_or(0);
        let mut store = if snapshots.is_empty() {
            PatientStore::new(session_gap)
        } else {
            PatientStore::load(snapshot_path(&dir, base), session_gap)?
        };
        logs.retain(|&g| g >= base);
        logs.sort_unstable();
        let mut replayed = 0;
        for (i, &g) in logs.iter().enumerate() {
            replayed += replay(&log_path(&dir, g), &mut store, i + 1 == logs.len())?;
        }
        let generation = logs.last().copied().unwrap_or(base);
        let path = log_path(&dir, generation);
        let file = open_log(&path)?;
        tracing::info!(patients = store.len(), replayed, generation, "patient store opened");
        Ok(DurableStore {
            dir,
            session_gap,
            compact_every,
            committed: RwLock::new(store),
            log: Mutex::new(LogWriter {
                generation,
                path,
                file,
                ops_since_compaction: replayed,
            }),
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn session_gap(&self) -> TimeDelta {
        self.session_gap
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn get(&self, patient_id: &str) -> Option<PatientProfile> {
        self.committed.read().unwrap().get(patient_id).cloned()
    }

    pub fn profiles(&self) -> Vec<PatientProfile> {
        self.committed.read().unwrap().profiles().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.committed.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Locks `patient_id` against concurrent writers and returns a working
    /// copy. Other patients stay writable. Blocks; call it off the async
    /// runtime threads.
    pub fn begin(&self, patient_id: &str) -> PatientTx {
        let lock = self
            .locks
            .lock()
            .unwrap()
            .entry(patient_id.to_string())
            .or_default()
            .clone();
        let guard = lock.blocking_lock_owned();
        let mut scratch = PatientStore::new(self.session_gap);
        if let Some(p) = self.get(patient_id) {
            scratch.insert(p);
        }
        PatientTx {
            patient_id: patient_id.to_string(),
            scratch,
            ops: Vec::new(),
            _guard: guard,
        }
    }

    /// Appends and fsyncs the transaction, then publishes it. Nothing is
    /// published if the write fails.
    pub fn commit(&self, tx: PatientTx) -> Result<(), StoreError> {
        if tx.ops.is_empty() {
            return Ok(());
        }
        let record = LogRecord {
            patient_id: tx.patient_id.clone(),
            ops: tx.ops.clone(),
        };
        let mut line = serde_json::to_string(&record).expect("log record serializes");
        line.push('\n');
        let compact = {
            let mut log = self.log.lock().unwrap();
            let path = log.path.clone();
            log.file.write_all(line.as_bytes()).map_err(io_err(&path))?;
            log.file.sync_data().map_err(io_err(&path))?;
            log.ops_since_compaction += 1;
            if let Some(profile) = tx.profile() {
                self.committed.write().unwrap().insert(profile.clone());
            }
            log.ops_since_compaction >= self.compact_every
        };
        if compact {
            if let Err(e) = self.compact() {
                // the log still holds everything; retry on the next commit
                tracing::warn!(error = %e, "compaction failed");
            }
        }
        Ok(())
    }

    /// Folds the log into a fresh snapshot and drops older files.
    pub fn compact(&self) -> Result<(), StoreError> {
        let mut log = self.log.lock().unwrap();
        let next = log.generation + 1;
        let next_log = log_path(&self.dir, next);
        let file = open_log(&next_log)?;
        sync_dir(&self.dir)?;
        let old = log.generation;
        log.generation = next;
        log.path = next_log;
        log.file = file;
        log.ops_since_compaction = 0;

        let snapshot = snapshot_path(&self.dir, next);
        self.committed
            .read()
            .unwrap()
            .save(&snapshot)
            .map_err(StoreError::Patient)?;
        sync_dir(&self.dir)?;
        for g in 0..=old {
            for p in [log_path(&self.dir, g), snapshot_path(&self.dir, g)] {
                match std::fs::remove_file(&p) {
                    Ok(()) => {}
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                    Err(e) => return Err(io_err(&p)(e)),
                }
            }
        }
        tracing::debug!(generation = next, "patient store compacted");
        Ok(())
    }

    /// Current snapshot in patient-store JSON form.
    pub fn to_json(&self) -> String {
        self.committed.read().unwrap().to_json()
    }
}

/// Applies every line of `path`; returns the number of records applied.
fn replay(path: &Path, store: &mut PatientStore, last_log: bool) -> Result<usize, StoreError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    let mut applied = 0;
    for (i, raw) in lines.iter().enumerate() {
        let torn_tail = last_log && i + 1 == lines.len() && !raw.ends_with('\n');
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let record: LogRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(_) if torn_tail => {
                tracing::warn!(path = %path.display(), "dropping torn final log line");
                break;
            }
            Err(e) => {
                return Err(StoreError::CorruptLog {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        };
        apply(store, &record).map_err(|e| StoreError::CorruptLog {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        applied += 1;
    }
    Ok(applied)
}
