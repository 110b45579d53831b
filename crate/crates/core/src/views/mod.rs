//! Representation views. A molecule is described from three angles: a
//! structure view (three fixed insight questions answered over the SMILES),
//! a task view (the SMILES wrapped with the task question), and the rule
//! view computed by the `rules` module. The first two become text prompts
//! embedded by a provider; this module builds the prompts, defines the
//! provider-independent embedding plumbing, and ships a deterministic mock
//! provider so every pipeline stage runs offline.

mod embedder;
mod mock;
mod prompts;

pub use embedder::{
    BackendError, CacheKey, Embedder, EmbedderError, EmbeddingBackend, EmbeddingCache, MemoryCache,
    MockBackend, RetryPolicy,
};
pub use mock::mock_embed;
pub use prompts::{
    build_structure_prompts, build_task_prompt, WrapperStyle, STRUCTURE_INSIGHT_QUESTIONS,
};

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// The three fusion inputs, in canonical order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    Structure,
    Task,
    Rule,
}

impl ViewKind {
    pub const ALL: [ViewKind; 3] = [ViewKind::Structure, ViewKind::Task, ViewKind::Rule];

    /// Canonical slot index used for gate weights and reports.
    pub fn slot(self) -> usize {
        match self {
            ViewKind::Structure => 0,
            ViewKind::Task => 1,
            ViewKind::Rule => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ViewKind::Structure => "structure",
            ViewKind::Task => "task",
            ViewKind::Rule => "rule",
        }
    }
}

/// One embedded prompt, tagged with enough identity to cache and audit it.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ViewEmbedding {
    pub view: ViewKind,
    pub provider_id: String,
    pub model_id: String,
    /// SHA-256 of the exact prompt text.
    pub prompt_sha256: [u8; 32],
    pub vector: Vec<f64>,
}

impl ViewEmbedding {
    pub fn dim(&self) -> usize {
        self.vector.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum AssembleError {
    #[error("structure view needs exactly {expected} embeddings, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("embedding dimensions differ: {first} vs {other}")]
    DimMismatch { first: usize, other: usize },
}

/// Concatenate the three structure-insight embeddings, in question order,
/// into the structure view vector.
pub fn assemble_structure_view(parts: &[ViewEmbedding]) -> Result<Vec<f64>, AssembleError> {
    let expected = STRUCTURE_INSIGHT_QUESTIONS.len();
    if parts.len() != expected {
        return Err(AssembleError::WrongCount {
            expected,
            got: parts.len(),
        });
    }
    let first = parts[0].dim();
    for p in parts {
        if p.dim() != first {
            return Err(AssembleError::DimMismatch {
                first,
                other: p.dim(),
            });
        }
    }
    let mut out = Vec::with_capacity(first * expected);
    for p in parts {
        out.extend_from_slice(&p.vector);
    }
    Ok(out)
}

/// SHA-256 of a prompt, the identity under which embeddings are cached.
pub fn prompt_sha256(prompt: &str) -> [u8; 32] {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(prompt.as_bytes());
    hasher.finalize().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn embedding(dim: usize, fill: f64) -> ViewEmbedding {
        ViewEmbedding {
            view: ViewKind::Structure,
            provider_id: "mock".to_string(),
            model_id: "m".to_string(),
            prompt_sha256: [0; 32],
            vector: alloc::vec![fill; dim],
        }
    }

    #[test]
    fn assembles_in_order() {
        let parts = [embedding(2, 1.0), embedding(2, 2.0), embedding(2, 3.0)];
        let v = assemble_structure_view(&parts).unwrap();
        assert_eq!(v, [1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
    }

    #[test]
    fn count_and_dim_guards() {
        assert!(matches!(
            assemble_structure_view(&[embedding(2, 0.0)]),
            Err(AssembleError::WrongCount {
                expected: 3,
                got: 1
            })
        ));
        let parts = [embedding(2, 0.0), embedding(3, 0.0), embedding(2, 0.0)];
        assert!(matches!(
            assemble_structure_view(&parts),
            Err(AssembleError::DimMismatch { first: 2, other: 3 })
        ));
    }

    #[test]
    fn slots_are_stable() {
        assert_eq!(ViewKind::Structure.slot(), 0);
        assert_eq!(ViewKind::Task.slot(), 1);
        assert_eq!(ViewKind::Rule.slot(), 2);
    }
}
