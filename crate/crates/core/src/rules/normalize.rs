//! Column normalization for numeric rules. Statistics are fit on training
//! vectors only and applied everywhere else, so no information flows from
//! validation or test labels into the features. Predicate columns pass
//! through untouched.

use super::{RuleFeatureVector, RuleKind, RuleSet};
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Mean and population standard deviation of one numeric column.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ColumnStats {
    pub rule_id: String,
    /// Position of the column in the feature vector.
    pub index: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, PartialEq, Debug, Default, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub columns: Vec<ColumnStats>,
    /// Full feature-vector length these statistics were fit against.
    pub feature_len: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum NormalizationError {
    #[error("statistics were fit for {expected} features, vector has {got}")]
    StatsMismatch { expected: usize, got: usize },
    #[error("vector is already normalized")]
    AlreadyNormalized,
    #[error("vector is not normalized")]
    NotNormalized,
}

/// Columns whose spread collapses below this are treated as constant and map
/// to zero rather than amplifying rounding noise.
const MIN_STD: f64 = 1e-12;

/// Fit per-column statistics over the numeric rules of `ruleset` using
/// training vectors only. `train` must be non-empty, with every vector raw
/// and of the rule set's length.
pub fn fit_normalization(ruleset: &RuleSet, train: &[RuleFeatureVector]) -> NormalizationStats {
    assert!(!train.is_empty(), "cannot fit normalization on no data");
    for v in train {
        assert_eq!(v.values.len(), ruleset.feature_len(), "vector length");
        assert!(!v.normalized, "fit takes raw vectors");
    }

    let n = train.len() as f64;
    let columns = ruleset
        .rules
        .iter()
        .enumerate()
        .filter(|(_, r)| r.kind == RuleKind::Numeric)
        .map(|(index, rule)| {
            let mean = train.iter().map(|v| v.values[index]).sum::<f64>() / n;
            let variance = train
                .iter()
                .map(|v| {
                    let d = v.values[index] - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            ColumnStats {
                rule_id: rule.id.clone(),
                index,
                mean,
                std: crate::fmath::sqrt(variance),
            }
        })
        .collect();
    NormalizationStats {
        columns,
        feature_len: ruleset.feature_len(),
    }
}

pub fn apply_normalization(
    stats: &NormalizationStats,
    vector: &RuleFeatureVector,
) -> Result<RuleFeatureVector, NormalizationError> {
    if vector.values.len() != stats.feature_len {
        return Err(NormalizationError::StatsMismatch {
            expected: stats.feature_len,
            got: vector.values.len(),
        });
    }
    if vector.normalized {
        return Err(NormalizationError::AlreadyNormalized);
    }
    let mut values = vector.values.clone();
    for col in &stats.columns {
        values[col.index] = if col.std > MIN_STD {
            (values[col.index] - col.mean) / col.std
        } else {
            0.0
        };
    }
    Ok(RuleFeatureVector {
        values,
        normalized: true,
    })
}

/// Inverse of `apply_normalization` for round-trip checks. Constant columns
/// recover their mean.
pub fn invert_normalization(
    stats: &NormalizationStats,
    vector: &RuleFeatureVector,
) -> Result<RuleFeatureVector, NormalizationError> {
    if vector.values.len() != stats.feature_len {
        return Err(NormalizationError::StatsMismatch {
            expected: stats.feature_len,
            got: vector.values.len(),
        });
    }
    if !vector.normalized {
        return Err(NormalizationError::NotNormalized);
    }
    let mut values = vector.values.clone();
    for col in &stats.columns {
        values[col.index] = if col.std > MIN_STD {
            values[col.index] * col.std + col.mean
        } else {
            col.mean
        };
    }
    Ok(RuleFeatureVector {
        values,
        normalized: false,
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse_rules;
    use super::*;

    fn raw(values: &[f64]) -> RuleFeatureVector {
        RuleFeatureVector {
            values: values.into(),
            normalized: false,
        }
    }

    fn two_column_ruleset() -> super::super::RuleSet {
        parse_rules("external x unit \"1\"\nrule p: ring_count == 0\nrule n: numeric x\n").unwrap()
    }

    #[test]
    fn normalizes_numeric_columns_only() {
        let rs = two_column_ruleset();
        let train = [raw(&[1.0, 2.0]), raw(&[0.0, 4.0]), raw(&[1.0, 6.0])];
        let stats = fit_normalization(&rs, &train);
        assert_eq!(stats.columns.len(), 1);
        assert_eq!(stats.columns[0].index, 1);
        assert!((stats.columns[0].mean - 4.0).abs() < 1e-12);
        // Population std over {2, 4, 6}: sqrt(8/3).
        assert!((stats.columns[0].std - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);

        let out = apply_normalization(&stats, &raw(&[1.0, 4.0])).unwrap();
        assert_eq!(out.values[0], 1.0); // predicate untouched
        assert!(out.values[1].abs() < 1e-12);
        assert!(out.normalized);
    }

    #[test]
    fn round_trip() {
        let rs = two_column_ruleset();
        let train = [raw(&[1.0, 2.5]), raw(&[0.0, -3.0]), raw(&[1.0, 9.0])];
        let stats = fit_normalization(&rs, &train);
        for v in &train {
            let there = apply_normalization(&stats, v).unwrap();
            let back = invert_normalization(&stats, &there).unwrap();
            assert!(!back.normalized);
            for (a, b) in back.values.iter().zip(&v.values) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let rs = two_column_ruleset();
        let train = [raw(&[1.0, 7.0]), raw(&[0.0, 7.0])];
        let stats = fit_normalization(&rs, &train);
        let out = apply_normalization(&stats, &raw(&[0.0, 7.0])).unwrap();
        assert_eq!(out.values[1], 0.0);
        let out = apply_normalization(&stats, &raw(&[0.0, 100.0])).unwrap();
        assert_eq!(out.values[1], 0.0);
    }

    #[test]
    fn guards() {
        let rs = two_column_ruleset();
        let stats = fit_normalization(&rs, &[raw(&[1.0, 2.0]), raw(&[1.0, 3.0])]);
        assert!(matches!(
            apply_normalization(&stats, &raw(&[1.0, 2.0, 3.0])),
            Err(NormalizationError::StatsMismatch {
                expected: 2,
                got: 3
            })
        ));
        let once = apply_normalization(&stats, &raw(&[1.0, 2.0])).unwrap();
        assert!(matches!(
            apply_normalization(&stats, &once),
            Err(NormalizationError::AlreadyNormalized)
        ));
        assert!(matches!(
            invert_normalization(&stats, &raw(&[1.0, 2.0])),
            Err(NormalizationError::NotNormalized)
        ));
    }

    #[test]
    #[should_panic(expected = "cannot fit normalization on no data")]
    fn empty_training_set_is_a_precondition_violation() {
        let rs = two_column_ruleset();
        fit_normalization(&rs, &[]);
    }
}
