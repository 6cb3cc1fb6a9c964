//! Fast-thinking memory: records keyed by the embedding of their canonical
//! main task, threshold lookup and durable persistence.

use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::sync::Mutex;

use crate::embedding::{ranked, Embedder};
use crate::emotion::Script;
use crate::error::{Error, Result};
use crate::persist::{hex, write_atomic};
use crate::types::MemoryRecord;

pub const DEFAULT_TAU: f64 = 0.4;
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Lookup {
    Hit { index: usize, record: MemoryRecord, distance: f64 },
    Miss { min_distance: Option<f64> },
}

impl Lookup {
    pub fn is_hit(&self) -> bool {
        matches!(self, Lookup::Hit { .. })
    }

    pub fn distance(&self) -> Option<f64> {
        match self {
            Lookup::Hit { distance, .. } => Some(*distance),
            Lookup::Miss { min_distance } => *min_distance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryStats {
    pub records: usize,
    pub total_hits: u64,
    pub tau: f64,
    pub dimension: usize,
}

#[derive(Serialize, Deserialize)]
struct StoreFile {
    version: u32,
    dimension: usize,
    checksum: String,
    records: Vec<MemoryRecord>,
}

fn checksum(records: &[MemoryRecord]) -> Result<String> {
    let bytes = serde_json::to_vec(records).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

/// Single-writer, multi-reader record store.
pub struct MemoryStore {
    records: RwLock<Vec<MemoryRecord>>,
    writer: Mutex<()>,
    embedder: Arc<dyn Embedder>,
    tau: f64,
    path: Option<PathBuf>,
}

impl MemoryStore {
    /// In-memory store with no persistence.
    pub fn ephemeral(embedder: Arc<dyn Embedder>, tau: f64) -> Result<Self> {
        Self::with_records(embedder, tau, None, Vec::new())
    }

    fn with_records(
        embedder: Arc<dyn Embedder>,
        tau: f64,
        path: Option<PathBuf>,
        records: Vec<MemoryRecord>,
    ) -> Result<Self> {
        if !(tau > 0.0 && tau < 2.0) {
            return Err(Error::InvalidInput(format!("tau must lie in (0, 2), got {tau}")));
        }
        Ok(MemoryStore { records: RwLock::new(records), writer: Mutex::new(()), embedder, tau, path })
    }

    /// Opens the store at `path`. A missing file is an empty store; anything
    /// unreadable is [`Error::CorruptStore`].
    pub fn load(path: impl Into<PathBuf>, embedder: Arc<dyn Embedder>, tau: f64) -> Result<Self> {
        let path = path.into();
        let records = match std::fs::read(&path) {
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(Error::CorruptStore { path, reason: e.to_string() }),
            Ok(bytes) => decode_store(&path, &bytes, embedder.dimension())?,
        };
        Self::with_records(embedder, tau, Some(path), records)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn dimension(&self) -> usize {
        self.embedder.dimension()
    }

    pub fn records(&self) -> Vec<MemoryRecord> {
        self.records.read().unwrap().clone()
    }

    pub fn len(&self) -> usize {
        self.records.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> MemoryStats {
        let records = self.records.read().unwrap();
        MemoryStats {
            records: records.len(),
            total_hits: records.iter().map(|r| r.hit_count).sum(),
            tau: self.tau,
            dimension: self.dimension(),
        }
    }

    pub async fn lookup(&self, main_task: &str) -> Result<Lookup> {
        self.lookup_with_tau(main_task, self.tau).await
    }

    /// Lookup against an explicit threshold. A hit bumps the record's
    /// `hit_count`.
    pub async fn lookup_with_tau(&self, main_task: &str, tau: f64) -> Result<Lookup> {
        let query = self.embedder.embed(main_task).await?;
        let best = {
            let records = self.records.read().unwrap();
            ranked(&query, &records)?.first().copied()
        };
        match best {
            Some((index, distance)) if distance <= tau => {
                let mut records = self.records.write().unwrap();
                let record = &mut records[index];
                record.hit_count += 1;
                Ok(Lookup::Hit { index, record: record.clone(), distance })
            }
            Some((_, distance)) => Ok(Lookup::Miss { min_distance: Some(distance) }),
            None => Ok(Lookup::Miss { min_distance: None }),
        }
    }

    /// Appends a record and persists it before returning its index.
    pub async fn store(&self, main_task: &str, script: Script) -> Result<usize> {
        if main_task.trim().is_empty() {
            return Err(Error::InvalidInput("main_task is empty".into()));
        }
        let embedding = self.embedder.embed(main_task).await?;
        if embedding.is_degenerate() {
            return Err(Error::DegenerateVector);
        }
        if embedding.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), actual: embedding.dimension() });
        }
        let record = MemoryRecord {
            main_task: main_task.to_string(),
            embedding: embedding.into_values(),
            script,
            created_at: Utc::now(),
            hit_count: 0,
        };
        let _guard = self.writer.lock().await;
        let mut next = self.records();
        next.push(record.clone());
        self.persist(&next)?;
        let mut records = self.records.write().unwrap();
        records.push(record);
        Ok(records.len() - 1)
    }

    pub async fn save(&self) -> Result<()> {
        let _guard = self.writer.lock().await;
        let snapshot = self.records();
        self.persist(&snapshot)
    }

    fn persist(&self, records: &[MemoryRecord]) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        let file = StoreFile {
            version: STORE_VERSION,
            dimension: self.dimension(),
            checksum: checksum(records)?,
            records: records.to_vec(),
        };
        let bytes = serde_json::to_vec_pretty(&file).map_err(|e| Error::Persistence {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        write_atomic(path, &bytes).map_err(|e| Error::Persistence { path: path.clone(), reason: e.to_string() })
    }
}

fn decode_store(path: &Path, bytes: &[u8], dimension: usize) -> Result<Vec<MemoryRecord>> {
    let corrupt = |reason: String| Error::CorruptStore { path: path.to_path_buf(), reason };
    let file: StoreFile = serde_json::from_slice(bytes).map_err(|e| corrupt(e.to_string()))?;
    if file.version != STORE_VERSION {
        return Err(corrupt(format!("unsupported version {}", file.version)));
    }
    if file.dimension != dimension {
        return Err(corrupt(format!("dimension {} does not match configured {dimension}", file.dimension)));
    }
    if let Some(bad) = file.records.iter().find(|r| r.embedding.len() != dimension) {
        return Err(corrupt(format!("record {:?} has dimension {}", bad.main_task, bad.embedding.len())));
    }
    if checksum(&file.records)? != file.checksum {
        return Err(corrupt("checksum mismatch".into()));
    }
    Ok(file.records)
}
