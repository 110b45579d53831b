//! The rule language: a small line-oriented DSL compiled into executable
//! feature functions over molecules. Predicates evaluate to exactly 0.0 or
//! 1.0; numeric rules pass a descriptor value through. Rule text transcribed
//! from an assistant's answer stays auditable: a rule set serializes back to
//! the DSL it was parsed from, and to JSON for inspection (one way).

mod eval;
mod normalize;
mod parser;
mod prompts;
mod serialize;

pub use eval::{evaluate_rules, RuleEvalError, RuleFeatureVector};
pub use normalize::{
    apply_normalization, fit_normalization, invert_normalization, ColumnStats, NormalizationError,
    NormalizationStats,
};
pub use parser::{parse_rules, RuleParseError};
pub use prompts::{
    build_data_rule_prompt, build_scientific_rule_prompt, sample_data_subsets, SubsetError,
};

use crate::chem::Molecule;
use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Where a rule came from: reasoning over the task description, or reasoning
/// over labeled examples.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Scientific,
    DataPattern,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Boolean expression; contributes 0.0 or 1.0.
    Predicate,
    /// Raw numeric value passed through (then normalized downstream).
    Numeric,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Number(f64),
    /// A shipped descriptor, by identifier.
    Descriptor(String),
    /// An externally supplied per-molecule value, by declared identifier.
    External(String),
    /// SMILES pattern containment test.
    Substructure(String),
    Cmp {
        op: CmpOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub kind: RuleKind,
    pub provenance: Provenance,
    pub expr: Expr,
}

/// Declaration of a value the caller must supply per molecule.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ExternalDecl {
    pub id: String,
    pub unit: String,
}

/// A compiled rule file. Feature vectors order entries exactly as rules were
/// declared.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct RuleSet {
    pub task: String,
    pub externals: Vec<ExternalDecl>,
    pub rules: Vec<Rule>,
    /// Substructure patterns compiled at parse time, keyed by source text.
    #[serde(skip)]
    pub(crate) patterns: BTreeMap<String, Molecule>,
}

impl RuleSet {
    pub fn feature_len(&self) -> usize {
        self.rules.len()
    }

    pub fn external_ids(&self) -> impl Iterator<Item = &str> {
        self.externals.iter().map(|e| e.id.as_str())
    }
}
