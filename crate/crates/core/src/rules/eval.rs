//! Rule evaluation: one molecule in, one feature vector out, entries in rule
//! declaration order. Predicates produce exactly 0.0 or 1.0.

use super::{CmpOp, Expr, Rule, RuleKind, RuleSet};
use crate::chem::{self, DescriptorSet, Molecule};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct RuleFeatureVector {
    pub values: Vec<f64>,
    /// Set by `apply_normalization`; raw vectors carry `false`.
    pub normalized: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum RuleEvalError {
    #[error("external `{id}` was declared but not supplied")]
    MissingExternal { id: String },
    #[error("rule `{rule_id}` produced a non-finite value")]
    NonFiniteResult { rule_id: String },
    /// Only reachable through hand-built expression trees; parsed rules are
    /// well-typed by construction.
    #[error("rule `{rule_id}` mixes boolean and numeric subexpressions")]
    TypeMismatch { rule_id: String },
    /// Only reachable through hand-built expression trees.
    #[error("rule `{rule_id}` uses pattern {pattern:?}: {reason}")]
    BadPattern {
        rule_id: String,
        pattern: String,
        reason: String,
    },
}

enum Value {
    Bool(bool),
    Num(f64),
}

/// Evaluate every rule against one perceived molecule. `externals` must
/// supply a finite value for each declared external identifier.
pub fn evaluate_rules(
    ruleset: &RuleSet,
    mol: &Molecule,
    externals: &BTreeMap<String, f64>,
) -> Result<RuleFeatureVector, RuleEvalError> {
    for decl in &ruleset.externals {
        if !externals.contains_key(&decl.id) {
            return Err(RuleEvalError::MissingExternal {
                id: decl.id.clone(),
            });
        }
    }

    let descriptors = chem::compute_descriptors(mol);
    let mut values = Vec::with_capacity(ruleset.rules.len());
    for rule in &ruleset.rules {
        let value = eval_expr(rule, &rule.expr, ruleset, mol, &descriptors, externals)?;
        let v = match (rule.kind, value) {
            (RuleKind::Predicate, Value::Bool(b)) => {
                if b {
                    1.0
                } else {
                    0.0
                }
            }
            (RuleKind::Numeric, Value::Num(x)) => x,
            _ => {
                return Err(RuleEvalError::TypeMismatch {
                    rule_id: rule.id.clone(),
                })
            }
        };
        if !v.is_finite() {
            return Err(RuleEvalError::NonFiniteResult {
                rule_id: rule.id.clone(),
            });
        }
        values.push(v);
    }
    Ok(RuleFeatureVector {
        values,
        normalized: false,
    })
}

fn eval_expr(
    rule: &Rule,
    expr: &Expr,
    ruleset: &RuleSet,
    mol: &Molecule,
    descriptors: &DescriptorSet,
    externals: &BTreeMap<String, f64>,
) -> Result<Value, RuleEvalError> {
    let type_mismatch = || RuleEvalError::TypeMismatch {
        rule_id: rule.id.clone(),
    };
    let num = |v: Value| match v {
        Value::Num(x) => Ok(x),
        Value::Bool(_) => Err(type_mismatch()),
    };
    let boolean = |v: Value| match v {
        Value::Bool(b) => Ok(b),
        Value::Num(_) => Err(type_mismatch()),
    };

    match expr {
        Expr::Number(v) => Ok(Value::Num(*v)),
        Expr::Descriptor(id) => descriptors
            .get(id)
            .map(Value::Num)
            .ok_or_else(|| RuleEvalError::MissingExternal { id: id.clone() }),
        Expr::External(id) => externals
            .get(id)
            .copied()
            .map(Value::Num)
            .ok_or_else(|| RuleEvalError::MissingExternal { id: id.clone() }),
        Expr::Substructure(pattern) => {
            let found = match ruleset.patterns.get(pattern) {
                Some(compiled) => chem::contains(compiled, mol),
                None => {
                    // Hand-built expression: compile on the fly.
                    let compiled =
                        Molecule::from_smiles(pattern).map_err(|e| RuleEvalError::BadPattern {
                            rule_id: rule.id.clone(),
                            pattern: pattern.clone(),
                            reason: alloc::format!("{e}"),
                        })?;
                    chem::contains(&compiled, mol)
                }
            };
            let found = found.map_err(|e| RuleEvalError::BadPattern {
                rule_id: rule.id.clone(),
                pattern: pattern.clone(),
                reason: alloc::format!("{e}"),
            })?;
            Ok(Value::Bool(found))
        }
        Expr::Cmp { op, lhs, rhs } => {
            let l = num(eval_expr(rule, lhs, ruleset, mol, descriptors, externals)?)?;
            let r = num(eval_expr(rule, rhs, ruleset, mol, descriptors, externals)?)?;
            let b = match op {
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Gt => l > r,
                CmpOp::Ge => l >= r,
                CmpOp::Eq => l == r,
            };
            Ok(Value::Bool(b))
        }
        Expr::And(a, b) => {
            let l = boolean(eval_expr(rule, a, ruleset, mol, descriptors, externals)?)?;
            let r = boolean(eval_expr(rule, b, ruleset, mol, descriptors, externals)?)?;
            Ok(Value::Bool(l && r))
        }
        Expr::Or(a, b) => {
            let l = boolean(eval_expr(rule, a, ruleset, mol, descriptors, externals)?)?;
            let r = boolean(eval_expr(rule, b, ruleset, mol, descriptors, externals)?)?;
            Ok(Value::Bool(l || r))
        }
        Expr::Not(inner) => {
            let v = boolean(eval_expr(
                rule,
                inner,
                ruleset,
                mol,
                descriptors,
                externals,
            )?)?;
            Ok(Value::Bool(!v))
        }
    }
}
