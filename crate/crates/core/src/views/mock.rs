//! Deterministic mock embeddings: a unit vector derived from SHA-256 of the
//! prompt and seed, expanded counter-mode. Equal (prompt, dim, seed) always
//! yields identical vectors; any change to the prompt decorrelates them.

use alloc::vec::Vec;
use sha2::{Digest, Sha256};

/// Embed `prompt` into `dim` dimensions (`dim >= 1`). Values are filled from
/// a hash stream in [-1, 1), then the vector is scaled to unit length.
pub fn mock_embed(prompt: &str, dim: usize, seed: u64) -> Vec<f64> {
    assert!(dim >= 1, "embedding dimension must be at least 1");

    let mut base = Sha256::new();
    base.update(seed.to_le_bytes());
    base.update(prompt.as_bytes());
    let base: [u8; 32] = base.finalize().into();

    let mut values = Vec::with_capacity(dim);
    let mut counter: u64 = 0;
    'outer: loop {
        let mut block = Sha256::new();
        block.update(base);
        block.update(counter.to_le_bytes());
        let block: [u8; 32] = block.finalize().into();
        for chunk in block.chunks_exact(8) {
            let bits = u64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
            // Top 53 bits make a uniform double in [0, 2); shift to [-1, 1).
            let unit = (bits >> 11) as f64 / (1u64 << 52) as f64;
            values.push(unit - 1.0);
            if values.len() == dim {
                break 'outer;
            }
        }
        counter += 1;
    }

    let norm_sq: f64 = values.iter().map(|v| v * v).sum();
    if norm_sq > 0.0 {
        let inv = 1.0 / crate::fmath::sqrt(norm_sq);
        for v in &mut values {
            *v *= inv;
        }
    } else {
        values[0] = 1.0;
    }
    values
}
