//! IO and orchestration around `mvmol-core`: dataset ingestion with
//! quarantine, the TOML run configuration, the on-disk embedding cache, the
//! HTTP embedding provider, binary checkpoints, and the staged CLI
//! (`featurize`, `embed`, `train`, `evaluate`, `contributions`, `prompts`).

pub mod artifacts;
pub mod cache;
pub mod commands;
pub mod config;
pub mod data;
pub mod provider;
