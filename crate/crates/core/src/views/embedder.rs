//! Provider-independent embedding orchestration: batch the misses, retry
//! transient failures with capped exponential backoff (honoring provider
//! retry-after hints), verify dimensions, and write results through to a
//! cache keyed by (provider, model, prompt hash). Sleeping is injected so
//! tests run instantly; IO-backed backends and caches live downstream.

use super::{prompt_sha256, ViewEmbedding, ViewKind};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;

/// Identity of a cached embedding.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct CacheKey {
    pub provider_id: String,
    pub model_id: String,
    pub prompt_sha256: [u8; 32],
}

/// What a provider call can report. `RateLimited` and `Unreachable` are
/// treated as transient; `Remote` and `Malformed` fail immediately.
#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum BackendError {
    #[error("provider unreachable: {0}")]
    Unreachable(String),
    #[error("provider returned status {status}: {body_excerpt}")]
    Remote { status: u16, body_excerpt: String },
    #[error("rate limited")]
    RateLimited { retry_after_ms: Option<u64> },
    #[error("malformed provider response: {0}")]
    Malformed(String),
}

pub trait EmbeddingBackend {
    fn provider_id(&self) -> &str;
    fn model_id(&self) -> &str;
    /// Embed a batch of prompts, one vector per prompt, in order.
    fn embed_batch(&self, prompts: &[&str]) -> Result<Vec<Vec<f64>>, BackendError>;
}

pub trait EmbeddingCache {
    fn load(&self, key: &CacheKey) -> Option<Vec<f64>>;
    fn store(&self, key: &CacheKey, vector: &[f64]);
}

impl<T: EmbeddingBackend + ?Sized> EmbeddingBackend for &T {
    fn provider_id(&self) -> &str {
        (**self).provider_id()
    }
    fn model_id(&self) -> &str {
        (**self).model_id()
    }
    fn embed_batch(&self, prompts: &[&str]) -> Result<Vec<Vec<f64>>, BackendError> {
        (**self).embed_batch(prompts)
    }
}

impl<T: EmbeddingCache + ?Sized> EmbeddingCache for &T {
    fn load(&self, key: &CacheKey) -> Option<Vec<f64>> {
        (**self).load(key)
    }
    fn store(&self, key: &CacheKey, vector: &[f64]) {
        (**self).store(key, vector)
    }
}

/// In-memory cache; also the reference implementation for tests.
#[derive(Default)]
pub struct MemoryCache {
    entries: RefCell<alloc::collections::BTreeMap<CacheKey, Vec<f64>>>,
}

impl MemoryCache {
    pub fn new() -> MemoryCache {
        MemoryCache::default()
    }

    pub fn len(&self) -> usize {
        self.entries.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl EmbeddingCache for MemoryCache {
    fn load(&self, key: &CacheKey) -> Option<Vec<f64>> {
        self.entries.borrow().get(key).cloned()
    }

    fn store(&self, key: &CacheKey, vector: &[f64]) {
        self.entries
            .borrow_mut()
            .insert(key.clone(), vector.to_vec());
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RetryPolicy {
    /// Total attempts per batch, first try included.
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub backoff_cap_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> RetryPolicy {
        RetryPolicy {
            max_attempts: 5,
            backoff_base_ms: 500,
            backoff_cap_ms: 8_000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retrying after the given 1-based attempt: base doubled
    /// per attempt, capped; a provider retry-after hint raises the floor.
    fn delay_ms(&self, attempt: u32, retry_after_ms: Option<u64>) -> u64 {
        let exp = self
            .backoff_base_ms
            .saturating_mul(1u64 << (attempt - 1).min(32))
            .min(self.backoff_cap_ms);
        match retry_after_ms {
            Some(hint) => exp.max(hint),
            None => exp,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum EmbedderError {
    #[error("provider unreachable after {attempts} attempts: {last}")]
    ProviderUnreachable { attempts: u32, last: String },
    #[error("still rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("provider error, status {status}: {body_excerpt}")]
    Provider { status: u16, body_excerpt: String },
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("embedding dimension changed mid-run: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("provider returned {got} vectors for {expected} prompts")]
    CountMismatch { expected: usize, got: usize },
}

/// Embedding front end over any backend and cache. `sleep` receives
/// milliseconds; production passes a real sleeper, tests a recorder.
pub struct Embedder<B, C, S> {
    backend: B,
    cache: C,
    policy: RetryPolicy,
    batch_size: usize,
    sleep: S,
}

impl<B, C, S> Embedder<B, C, S>
where
    B: EmbeddingBackend,
    C: EmbeddingCache,
    S: Fn(u64),
{
    pub fn new(backend: B, cache: C, policy: RetryPolicy, batch_size: usize, sleep: S) -> Self {
        assert!(batch_size >= 1, "batch size must be at least 1");
        Embedder {
            backend,
            cache,
            policy,
            batch_size,
            sleep,
        }
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn cache(&self) -> &C {
        &self.cache
    }

    /// Embed prompts in order, serving repeats and cached entries without
    /// provider calls. Every returned vector has the same dimension.
    pub fn embed(
        &self,
        prompts: &[String],
        view: ViewKind,
    ) -> Result<Vec<ViewEmbedding>, EmbedderError> {
        let provider_id = self.backend.provider_id().to_string();
        let model_id = self.backend.model_id().to_string();
        let key_of = |hash: [u8; 32]| CacheKey {
            provider_id: provider_id.clone(),
            model_id: model_id.clone(),
            prompt_sha256: hash,
        };

        let hashes: Vec<[u8; 32]> = prompts.iter().map(|p| prompt_sha256(p)).collect();
        let mut vectors: Vec<Option<Vec<f64>>> = hashes
            .iter()
            .map(|&h| self.cache.load(&key_of(h)))
            .collect();

        // Distinct misses, in first-appearance order.
        let mut miss_hashes: Vec<[u8; 32]> = Vec::new();
        let mut miss_prompts: Vec<&str> = Vec::new();
        for (i, v) in vectors.iter().enumerate() {
            if v.is_none() && !miss_hashes.contains(&hashes[i]) {
                miss_hashes.push(hashes[i]);
                miss_prompts.push(prompts[i].as_str());
            }
        }

        let mut expected_dim: Option<usize> = vectors.iter().flatten().next().map(|v| v.len());

        let mut fetched: alloc::collections::BTreeMap<[u8; 32], Vec<f64>> =
            alloc::collections::BTreeMap::new();
        for (batch_prompts, batch_hashes) in miss_prompts
            .chunks(self.batch_size)
            .zip(miss_hashes.chunks(self.batch_size))
        {
            let batch = self.call_with_retry(batch_prompts)?;
            if batch.len() != batch_prompts.len() {
                return Err(EmbedderError::CountMismatch {
                    expected: batch_prompts.len(),
                    got: batch.len(),
                });
            }
            for (hash, vector) in batch_hashes.iter().zip(batch) {
                match expected_dim {
                    None => expected_dim = Some(vector.len()),
                    Some(d) if d != vector.len() => {
                        return Err(EmbedderError::DimMismatch {
                            expected: d,
                            got: vector.len(),
                        })
                    }
                    Some(_) => {}
                }
                self.cache.store(&key_of(*hash), &vector);
                fetched.insert(*hash, vector);
            }
        }

        for (i, slot) in vectors.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = fetched.get(&hashes[i]).cloned();
            }
        }

        let expected = expected_dim.unwrap_or(0);
        let mut out = Vec::with_capacity(prompts.len());
        for (i, slot) in vectors.into_iter().enumerate() {
            let vector = slot.expect("every prompt fetched or cached");
            if vector.len() != expected {
                return Err(EmbedderError::DimMismatch {
                    expected,
                    got: vector.len(),
                });
            }
            out.push(ViewEmbedding {
                view,
                provider_id: provider_id.clone(),
                model_id: model_id.clone(),
                prompt_sha256: hashes[i],
                vector,
            });
        }
        Ok(out)
    }

    fn call_with_retry(&self, prompts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedderError> {
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            match self.backend.embed_batch(prompts) {
                Ok(batch) => return Ok(batch),
                Err(BackendError::Remote {
                    status,
                    body_excerpt,
                }) => {
                    return Err(EmbedderError::Provider {
                        status,
                        body_excerpt,
                    })
                }
                Err(BackendError::Malformed(m)) => return Err(EmbedderError::Malformed(m)),
                Err(BackendError::Unreachable(last)) => {
                    if attempt >= self.policy.max_attempts {
                        return Err(EmbedderError::ProviderUnreachable {
                            attempts: attempt,
                            last,
                        });
                    }
                    (self.sleep)(self.policy.delay_ms(attempt, None));
                }
                Err(BackendError::RateLimited { retry_after_ms }) => {
                    if attempt >= self.policy.max_attempts {
                        return Err(EmbedderError::RateLimited { attempts: attempt });
                    }
                    (self.sleep)(self.policy.delay_ms(attempt, retry_after_ms));
                }
            }
        }
    }
}

/// The offline provider: deterministic hash-derived unit vectors. The model
/// id encodes dimension and seed so differently configured mocks never share
/// cache entries.
pub struct MockBackend {
    dim: usize,
    seed: u64,
    model_id: String,
    calls: core::cell::Cell<usize>,
}

impl MockBackend {
    pub fn new(dim: usize, seed: u64) -> MockBackend {
        MockBackend {
            dim,
            seed,
            model_id: alloc::format!("mock-d{dim}-s{seed}"),
            calls: core::cell::Cell::new(0),
        }
    }

    /// Number of embed_batch calls that reached this backend (cache misses).
    pub fn calls(&self) -> usize {
        self.calls.get()
    }
}

impl EmbeddingBackend for MockBackend {
    fn provider_id(&self) -> &str {
        "mock"
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn embed_batch(&self, prompts: &[&str]) -> Result<Vec<Vec<f64>>, BackendError> {
        self.calls.set(self.calls.get() + 1);
        Ok(prompts
            .iter()
            .map(|p| super::mock_embed(p, self.dim, self.seed))
            .collect())
    }
}
