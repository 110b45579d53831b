//! On-disk embedding cache: one binary file per entry, content-addressed by
//! the (provider, model, prompt digest) key, written atomically so a
//! crashed run never leaves a torn vector. A JSON-lines sidecar index is
//! appended for human inspection; the binary files are the truth.

use mvmol_core::views::{CacheKey, EmbeddingCache};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

pub struct DiskCache {
    dir: PathBuf,
}

#[derive(Serialize)]
struct IndexLine<'a> {
    file: &'a str,
    provider_id: &'a str,
    model_id: &'a str,
    prompt_sha256: String,
    dim: usize,
    created_unix: u64,
}

impl DiskCache {
    pub fn open(dir: &Path) -> std::io::Result<DiskCache> {
        std::fs::create_dir_all(dir)?;
        Ok(DiskCache {
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Number of entries currently on disk.
    pub fn len(&self) -> usize {
        match std::fs::read_dir(&self.dir) {
            Ok(entries) => entries
                .filter_map(|e| e.ok())
                .filter(|e| e.path().extension().is_some_and(|x| x == "vec"))
                .count(),
            Err(_) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn file_stem(key: &CacheKey) -> String {
        let mut hasher = Sha256::new();
        hasher.update(key.provider_id.as_bytes());
        hasher.update([0]);
        hasher.update(key.model_id.as_bytes());
        hasher.update([0]);
        hasher.update(key.prompt_sha256);
        hex::encode(hasher.finalize())
    }

    fn entry_path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.vec", Self::file_stem(key)))
    }

    fn encode(vector: &[f64]) -> Vec<f64> {
        vector.to_vec()
    }

    fn write_entry(&self, key: &CacheKey, vector: &[f64]) -> std::io::Result<()> {
        let path = self.entry_path(key);
        if path.exists() {
            // Values for a key are identical by construction.
            return Ok(());
        }
        let mut bytes = Vec::with_capacity(4 + vector.len() * 8);
        bytes.extend_from_slice(&(vector.len() as u32).to_le_bytes());
        for v in Self::encode(vector) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let tmp = self.dir.join(format!(
            ".{}.tmp-{}",
            Self::file_stem(key),
            std::process::id()
        ));
        std::fs::write(&tmp, &bytes)?;
        std::fs::rename(&tmp, &path)?;
        self.append_index(key, vector.len());
        Ok(())
    }

    fn append_index(&self, key: &CacheKey, dim: usize) {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let file_name = format!("{}.vec", Self::file_stem(key));
        let line = IndexLine {
            file: &file_name,
            provider_id: &key.provider_id,
            model_id: &key.model_id,
            prompt_sha256: hex::encode(key.prompt_sha256),
            dim,
            created_unix,
        };
        let Ok(json) = serde_json::to_string(&line) else {
            return;
        };
        let index = self.dir.join("index.jsonl");
        if let Ok(mut f) = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(index)
        {
            let _ = writeln!(f, "{json}");
        }
    }

    fn read_entry(&self, key: &CacheKey) -> Option<Vec<f64>> {
        let bytes = std::fs::read(self.entry_path(key)).ok()?;
        if bytes.len() < 4 {
            return None;
        }
        let dim = u32::from_le_bytes(bytes[0..4].try_into().ok()?) as usize;
        let body = &bytes[4..];
        if body.len() != dim * 8 {
            return None;
        }
        let mut vector = Vec::with_capacity(dim);
        for chunk in body.chunks_exact(8) {
            vector.push(f64::from_le_bytes(chunk.try_into().ok()?));
        }
        Some(vector)
    }
}

impl EmbeddingCache for DiskCache {
    fn load(&self, key: &CacheKey) -> Option<Vec<f64>> {
        self.read_entry(key)
    }

    fn store(&self, key: &CacheKey, vector: &[f64]) {
        if let Err(e) = self.write_entry(key, vector) {
            eprintln!(
                "warning: embedding cache write failed in {}: {e}",
                self.dir.display()
            );
        }
    }
}
