//! Record/replay store.
//!
//! One UTF-8 file per (model, dataset) named `<model>__<dataset>.jsonl`, where
//! `<model>` keeps ASCII alphanumerics, `-`, `_` and `.` and maps everything
//! else to `_`. Each line is one JSON object with exactly these fields, in
//! this order:
//!
//! | field | type | meaning |
//! |---|---|---|
//! | `key` | hex string | [`LlmRequest::key`](super::LlmRequest::key) |
//! | `request_digest` | hex string | [`LlmRequest::digest`](super::LlmRequest::digest) |
//! | `response_text` | string | completion text, byte for byte |
//! | `prompt_tokens` | integer | usage as reported |
//! | `completion_tokens` | integer | usage as reported |
//! | `latency_ms` | integer | wall time of the original call |
//! | `timestamp` | integer | ms since the Unix epoch of the original call |
//!
//! New records are appended as they arrive. When a key appears more than once
//! the last line wins. [`FixtureStore::compact`] rewrites each file sorted by
//! key through a temporary file and a rename, so a compacted store is a
//! canonical function of its contents.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LlmError, LlmExchange, LlmRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreRecord {
    pub key: String,
    pub request_digest: String,
    pub response_text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
    pub timestamp: u64,
}

pub struct FixtureStore {
    dir: PathBuf,
    files: Mutex<HashMap<String, BTreeMap<String, StoreRecord>>>,
}

fn store_err(path: &Path, e: impl std::fmt::Display) -> LlmError {
    LlmError::Store(format!("{}: {e}", path.display()))
}

pub fn file_stem(model: &str, dataset: &str) -> String {
    let clean: String = model
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{clean}__{dataset}")
}

impl FixtureStore {
    /// Opens (creating if needed) the store in `dir` and loads every file.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| store_err(&dir, e))?;
        let mut files = HashMap::new();
        let entries = fs::read_dir(&dir).map_err(|e| store_err(&dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| store_err(&dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("jsonl") {
                continue;
            }
            let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
            files.insert(stem, read_file(&path)?);
        }
        Ok(FixtureStore {
            dir,
            files: Mutex::new(files),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn stem(request: &LlmRequest) -> String {
        file_stem(&request.model_id, request.bundle.dataset.id())
    }

    pub fn get(&self, request: &LlmRequest, key: &str) -> Option<StoreRecord> {
        let files = self.files.lock().unwrap();
        files.get(&Self::stem(request))?.get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.files.lock().unwrap().values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert(&self, exchange: &LlmExchange) -> Result<(), LlmError> {
        let rec = StoreRecord {
            key: exchange.key.clone(),
            request_digest: exchange.request.digest(),
            response_text: exchange.response_text.clone(),
            prompt_tokens: exchange.prompt_tokens,
            completion_tokens: exchange.completion_tokens,
            latency_ms: exchange.latency_ms,
            timestamp: exchange.timestamp,
        };
        let stem = Self::stem(&exchange.request);
        let path = self.dir.join(format!("{stem}.jsonl"));
        let mut files = self.files.lock().unwrap();
        let mut line = serde_json::to_string(&rec).map_err(|e| store_err(&path, e))?;
        line.push('\n');
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| store_err(&path, e))?;
        f.write_all(line.as_bytes()).map_err(|e| store_err(&path, e))?;
        files.entry(stem).or_default().insert(rec.key.clone(), rec);
        Ok(())
    }

    /// Rewrites every file sorted by key with one line per key.
    pub fn compact(&self) -> Result<(), LlmError> {
        let files = self.files.lock().unwrap();
        for (stem, records) in files.iter() {
            let path = self.dir.join(format!("{stem}.jsonl"));
            let tmp = self.dir.join(format!(".{stem}.jsonl.tmp"));
            let mut f = File::create(&tmp).map_err(|e| store_err(&tmp, e))?;
            for rec in records.values() {
                let line = serde_json::to_string(rec).map_err(|e| store_err(&tmp, e))?;
                writeln!(f, "{line}").map_err(|e| store_err(&tmp, e))?;
            }
            f.sync_all().map_err(|e| store_err(&tmp, e))?;
            fs::rename(&tmp, &path).map_err(|e| store_err(&path, e))?;
        }
        Ok(())
    }

    /// sha256 over all records in (file, key) order, independent of the order
    /// in which they were appended.
    pub fn digest(&self) -> String {
        let files = self.files.lock().unwrap();
        let mut stems: Vec<&String> = files.keys().collect();
        stems.sort();
        let mut h = Sha256::new();
        for stem in stems {
            h.update(stem.as_bytes());
            h.update([0]);
            for rec in files[stem].values() {
                h.update(serde_json::to_vec(rec).expect("records serialize"));
                h.update([b'\n']);
            }
        }
        hex::encode(h.finalize())
    }
}

fn read_file(path: &Path) -> Result<BTreeMap<String, StoreRecord>, LlmError> {
    let f = File::open(path).map_err(|e| store_err(path, e))?;
    let mut out = BTreeMap::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| store_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: StoreRecord = serde_json::from_str(&line)
            .map_err(|e| store_err(path, format!("line {}: {e}", n + 1)))?;
        out.insert(rec.key.clone(), rec);
    }
    Ok(out)
}
