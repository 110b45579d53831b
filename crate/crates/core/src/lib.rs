//! Core algorithms for multi-view molecular property prediction.
//!
//! This crate is `no_std` + `alloc`: everything here is pure computation over
//! in-memory data. The companion `mvmol` crate adds file formats, the disk
//! embedding cache, the HTTP provider, and the CLI.
//!
//! The pipeline, end to end:
//!
//! 1. [`chem`] parses SMILES into molecular graphs and computes descriptors,
//!    substructure matches, and Bemis-Murcko scaffolds.
//! 2. [`rules`] compiles a closed rule DSL into per-molecule feature vectors
//!    and builds the two rule-generation prompts.
//! 3. [`views`] builds the structure/task prompts and assembles embedding
//!    vectors from a pluggable provider (a deterministic mock ships here).
//! 4. [`model`] fuses the three views with per-molecule simplex weights,
//!    predicts through an MLP, and trains with Adam + early stopping.
//! 5. [`metrics`] and [`split`] provide ROC-AUC/RMSE and the deterministic
//!    scaffold split.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chem;
pub mod fmath;
pub mod metrics;
pub mod model;
pub mod rules;
pub mod split;
pub mod views;

pub use chem::Molecule;
pub use model::FusionModel;
pub use rules::RuleSet;
