//! Durable run artifacts: the binary model checkpoint, JSON/JSON-lines
//! writers, and the run manifest. Everything is written atomically
//! (temp file + rename) so interrupted runs never leave half-written files,
//! and everything except the manifest is byte-deterministic for a given
//! seed and input.

use anyhow::{bail, Context};
use mvmol_core::model::{ModelShape, TaskKind};
use mvmol_core::rules::NormalizationStats;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Identifies the checkpoint container format.
const MAGIC: &[u8; 8] = b"MVMLCKP1";
const FORMAT_VERSION: u32 = 1;

/// Everything needed to reload a trained model and featurize new molecules
/// the same way: architecture, task, the rule columns and their training-set
/// normalization, and the embedding identity the view vectors came from.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub shape: ModelShape,
    pub task: TaskKind,
    pub seed: u64,
    pub label_columns: Vec<String>,
    pub rule_ids: Vec<String>,
    pub normalization: NormalizationStats,
    pub provider_id: String,
    pub model_id: String,
}

/// Write `bytes` to `path` atomically, creating parent directories.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| Path::new(".").to_path_buf());
    std::fs::create_dir_all(&parent)
        .with_context(|| format!("creating directory {}", parent.display()))?;
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("artifact");
    let tmp = parent.join(format!(".{}.tmp-{}", file_name, std::process::id()));
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("moving {} into place", path.display()))?;
    Ok(())
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).context("serializing JSON artifact")?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> anyhow::Result<()> {
    let mut bytes = Vec::new();
    for item in items {
        serde_json::to_writer(&mut bytes, item).context("serializing JSON-lines artifact")?;
        bytes.push(b'\n');
    }
    atomic_write(path, &bytes)
}

pub fn sha256_hex_file(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn save_checkpoint(path: &Path, meta: &CheckpointMeta, params: &[f64]) -> anyhow::Result<()> {
    let header = serde_json::to_vec(meta).context("serializing checkpoint header")?;
    let mut bytes = Vec::with_capacity(MAGIC.len() + 4 + 8 + header.len() + 8 + params.len() * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(header.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header);
    bytes.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    atomic_write(path, &bytes)
}

pub fn load_checkpoint(path: &Path) -> anyhow::Result<(CheckpointMeta, Vec<f64>)> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading checkpoint {}", path.display()))?;
    let mut cursor = 0usize;
    let take = |cursor: &mut usize, n: usize| -> anyhow::Result<&[u8]> {
        let end = cursor
            .checked_add(n)
            .filter(|&e| e <= bytes.len())
            .with_context(|| format!("checkpoint {} is truncated", path.display()))?;
        let slice = &bytes[*cursor..end];
        *cursor = end;
        Ok(slice)
    };
    if take(&mut cursor, MAGIC.len())? != MAGIC {
        bail!("{} is not a model checkpoint (bad magic)", path.display());
    }
    let version = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        bail!(
            "checkpoint {} uses format version {version}; this build reads version {FORMAT_VERSION}",
            path.display()
        );
    }
    let header_len = u64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap()) as usize;
    let meta: CheckpointMeta = serde_json::from_slice(take(&mut cursor, header_len)?)
        .with_context(|| format!("parsing checkpoint header in {}", path.display()))?;
    let count = u64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap()) as usize;
    meta.shape
        .validate()
        .map_err(|e| anyhow::anyhow!("checkpoint shape is invalid: {e}"))?;
    let expected = meta.shape.layout().total_len;
    if count != expected {
        bail!(
            "checkpoint {} holds {count} parameters but its shape needs {expected}",
            path.display()
        );
    }
    let body = take(&mut cursor, count * 8)?;
    if cursor != bytes.len() {
        bail!(
            "checkpoint {} has {} trailing bytes",
            path.display(),
            bytes.len() - cursor
        );
    }
    let params = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((meta, params))
}

/// Run summary written next to the other artifacts. Contains wall-clock
/// timestamps, so it is the one file that is not byte-reproducible.
#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub created_unix: u64,
    pub provider_id: String,
    pub model_id: String,
    pub views: Vec<String>,
    pub seeds: Vec<u64>,
    /// Artifact file name -> SHA-256 of its content.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, provider_id: &str, model_id: &str) -> Manifest {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Manifest {
            command: command.to_string(),
            created_unix,
            provider_id: provider_id.to_string(),
            model_id: model_id.to_string(),
            views: Vec::new(),
            seeds: Vec::new(),
            files: BTreeMap::new(),
        }
    }

    /// Record an artifact that already exists in `out_dir`.
    pub fn add_file(&mut self, out_dir: &Path, name: &str) -> anyhow::Result<()> {
        let digest = sha256_hex_file(&out_dir.join(name))?;
        self.files.insert(name.to_string(), digest);
        Ok(())
    }

    pub fn write(&self, out_dir: &Path) -> anyhow::Result<()> {
        write_json_pretty(&out_dir.join("manifest.json"), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mvmol_core::model::OutputHead;
    use mvmol_core::rules::ColumnStats;
    use mvmol_core::views::ViewKind;

    fn sample_meta() -> CheckpointMeta {
        CheckpointMeta {
            shape: ModelShape {
                views: vec![(ViewKind::Structure, 4), (ViewKind::Rule, 3)],
                hidden_dim: 5,
                mlp_hidden: vec![4],
                head: OutputHead::SigmoidScalar,
            },
            task: TaskKind::Classification,
            seed: 7,
            label_columns: vec!["p_np".into()],
            rule_ids: vec!["light".into(), "no_acid".into()],
            normalization: NormalizationStats {
                columns: vec![ColumnStats {
                    rule_id: "light".into(),
                    index: 0,
                    mean: 0.25,
                    std: 1.5,
                }],
                feature_len: 3,
            },
            provider_id: "mock".into(),
            model_id: "mock-d4-s0".into(),
        }
    }

    fn param_count(meta: &CheckpointMeta) -> usize {
        meta.shape.layout().total_len
    }

    #[test]
    fn checkpoint_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.mvml");
        let meta = sample_meta();
        let params: Vec<f64> = (0..param_count(&meta))
            .map(|i| (i as f64) * 0.125 - 3.0)
            .collect();
        save_checkpoint(&path, &meta, &params).unwrap();
        let (loaded_meta, loaded_params) = load_checkpoint(&path).unwrap();
        assert_eq!(loaded_meta, meta);
        assert_eq!(loaded_params, params);
    }

    #[test]
    fn checkpoint_bytes_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.mvml");
        let b = dir.path().join("b.mvml");
        let meta = sample_meta();
        let params = vec![0.5; param_count(&meta)];
        save_checkpoint(&a, &meta, &params).unwrap();
        save_checkpoint(&b, &meta, &params).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.mvml");
        std::fs::write(&path, b"NOTACKPT-and-more-bytes").unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("bad magic"), "{err}");
    }

    #[test]
    fn rejects_truncated_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.mvml");
        let meta = sample_meta();
        let params = vec![0.5; param_count(&meta)];
        save_checkpoint(&path, &meta, &params).unwrap();
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() - 5]).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
    }

    #[test]
    fn rejects_wrong_parameter_count() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.mvml");
        let meta = sample_meta();
        let params = vec![0.5; param_count(&meta) + 1];
        save_checkpoint(&path, &meta, &params).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("parameters"), "{err}");
    }

    #[test]
    fn atomic_write_creates_parents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/c.txt");
        atomic_write(&path, b"hello").unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "hello");
    }

    #[test]
    fn jsonl_writes_one_line_per_item() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        write_jsonl(
            &path,
            &[serde_json::json!({"a": 1}), serde_json::json!({"a": 2})],
        )
        .unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "{\"a\":1}\n{\"a\":2}\n");
    }

    #[test]
    fn manifest_lists_files_with_digests() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x.txt"), b"content").unwrap();
        let mut manifest = Manifest::new("train", "mock", "mock-d4-s0");
        manifest.add_file(dir.path(), "x.txt").unwrap();
        manifest.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        assert!(text.contains("x.txt"));
        assert!(text.contains(&hex::encode(Sha256::digest(b"content"))));
    }
}
