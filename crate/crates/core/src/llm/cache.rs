//! Persistent completion cache.
//!
//! Completions are expensive and the pipeline must be re-runnable, so
//! every raw completion is stored in an append-only line-delimited file
//! keyed by a digest of `(model, params, full prompt)`. A key, once
//! written, is never rewritten with different content; hitting such a
//! conflict means the store is corrupt and is reported rather than
//! papered over. Readers share a lock-protected map; appends are
//! serialized through one writer handle.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::llm::{GenerationParams, Message};
use crate::{Error, Result};

/// One stored completion.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CacheRecord {
    pub key: String,
    pub model: String,
    pub prompt: String,
    pub params: CacheParams,
    pub completion: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CacheParams {
    pub temperature: f64,
    pub max_output_tokens: u32,
}

/// Digest of `(model_name, params, full prompt)`: SHA-256 over a
/// canonical, length-prefixed concatenation, so the key is reproducible
/// across platforms and collisions require breaking the hash.
pub fn cache_key(params: &GenerationParams, messages: &[Message]) -> String {
    let mut hasher = Sha256::new();
    let mut feed = |bytes: &[u8]| {
        hasher.update((bytes.len() as u64).to_be_bytes());
        hasher.update(bytes);
    };
    feed(params.model_name.as_bytes());
    feed(params_fingerprint(params).as_bytes());
    for message in messages {
        feed(message.role.as_bytes());
        feed(message.content.as_bytes());
    }
    hex::encode(hasher.finalize())
}

fn params_fingerprint(params: &GenerationParams) -> String {
    format!(
        "temperature={};max_output_tokens={}",
        params.temperature, params.max_output_tokens
    )
}

/// The full prompt as stored in cache records: role-prefixed lines.
pub fn prompt_text(messages: &[Message]) -> String {
    messages
        .iter()
        .map(|m| format!("{}: {}", m.role, m.content))
        .collect::<Vec<_>>()
        .join("\n")
}

/// File-backed append-only completion store.
#[derive(Debug)]
pub struct PredictionCache {
    path: PathBuf,
    entries: RwLock<HashMap<String, String>>,
    appender: Mutex<File>,
}

impl PredictionCache {
    /// Opens (creating if needed) the cache file and loads every record.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (idx, line) in reader.lines().enumerate() {
                let line = line?;
                if line.is_empty() {
                    continue;
                }
                let record: CacheRecord =
                    serde_json::from_str(&line).map_err(|e| Error::CacheCorrupt {
                        line: idx + 1,
                        message: e.to_string(),
                    })?;
                if let Some(existing) = entries.get(&record.key) {
                    if existing != &record.completion {
                        return Err(Error::CacheConflict { key: record.key });
                    }
                }
                entries.insert(record.key, record.completion);
            }
        }
        let appender = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            entries: RwLock::new(entries),
            appender: Mutex::new(appender),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    /// Appends a record. Re-inserting an existing key with identical
    /// content is a no-op; differing content is a conflict error.
    pub fn insert(&self, record: CacheRecord) -> Result<()> {
        let mut appender = self.appender.lock().expect("cache appender lock");
        {
            let entries = self.entries.read().expect("cache lock");
            match entries.get(&record.key) {
                Some(existing) if existing == &record.completion => return Ok(()),
                Some(_) => return Err(Error::CacheConflict { key: record.key }),
                None => {}
            }
        }
        let mut line = serde_json::to_string(&record).expect("record serializes");
        line.push('\n');
        appender.write_all(line.as_bytes())?;
        appender.flush()?;
        self.entries
            .write()
            .expect("cache lock")
            .insert(record.key, record.completion);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GenerationParams {
        GenerationParams::default()
    }

    fn record(key: &str, completion: &str) -> CacheRecord {
        CacheRecord {
            key: key.into(),
            model: "m".into(),
            prompt: "user: p".into(),
            params: CacheParams {
                temperature: 0.3,
                max_output_tokens: 4096,
            },
            completion: completion.into(),
            timestamp: "2024-01-01T00:00:00Z".into(),
        }
    }

    #[test]
    fn key_is_stable_and_sensitive() {
        let messages = vec![Message::user("Please extract")];
        let k1 = cache_key(&params(), &messages);
        let k2 = cache_key(&params(), &messages);
        assert_eq!(k1, k2);
        assert_eq!(k1.len(), 64);

        let mut other = params();
        other.temperature = 0.7;
        assert_ne!(k1, cache_key(&other, &messages));
        assert_ne!(
            k1,
            cache_key(&params(), &[Message::user("Please extract!")])
        );
        // Role changes count too.
        assert_ne!(k1, cache_key(&params(), &[Message::system("Please extract")]));
    }

    #[test]
    fn length_prefixing_prevents_field_bleeding() {
        // ("ab", "c") and ("a", "bc") must not collide.
        let mut p1 = params();
        p1.model_name = "ab".into();
        let mut p2 = params();
        p2.model_name = "a".into();
        let k1 = cache_key(&p1, &[Message::user("c")]);
        let k2 = cache_key(&p2, &[Message::user("bc")]);
        assert_ne!(k1, k2);
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let cache = PredictionCache::open(&path).unwrap();
            cache.insert(record("k1", "fever")).unwrap();
            cache.insert(record("k2", "- none -")).unwrap();
        }
        let cache = PredictionCache::open(&path).unwrap();
        assert_eq!(cache.len(), 2);
        assert_eq!(cache.get("k1").as_deref(), Some("fever"));
    }

    #[test]
    fn identical_reinsert_is_a_noop() {
        let dir = tempfile::TempDir::new().unwrap();
        let cache = PredictionCache::open(dir.path().join("c.jsonl")).unwrap();
        cache.insert(record("k", "x")).unwrap();
        cache.insert(record("k", "x")).unwrap();
        assert_eq!(cache.len(), 1);
    }

    #[test]
    fn conflicting_reinsert_is_an_error() {
        let dir = tempfile::TempDir::new().unwrap();
        let cache = PredictionCache::open(dir.path().join("c.jsonl")).unwrap();
        cache.insert(record("k", "x")).unwrap();
        let err = cache.insert(record("k", "y")).unwrap_err();
        assert!(matches!(err, Error::CacheConflict { .. }), "{err}");
    }

    #[test]
    fn corrupt_lines_are_reported_with_position() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("c.jsonl");
        std::fs::write(&path, "not json\n").unwrap();
        let err = PredictionCache::open(&path).unwrap_err();
        assert!(matches!(err, Error::CacheCorrupt { line: 1, .. }), "{err}");
    }

    #[test]
    fn conflicting_file_records_are_rejected_on_open() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("c.jsonl");
        let a = serde_json::to_string(&record("k", "x")).unwrap();
        let b = serde_json::to_string(&record("k", "y")).unwrap();
        std::fs::write(&path, format!("{a}\n{b}\n")).unwrap();
        let err = PredictionCache::open(&path).unwrap_err();
        assert!(matches!(err, Error::CacheConflict { .. }), "{err}");
    }
}
