//! Deterministic scaffold split. Records are grouped by scaffold key; groups
//! go whole into one part, largest group first, so structurally related
//! molecules never straddle the train/test boundary.
//!
//! Part sizes: validation and test reserve the ceiling of their fractions,
//! train takes the remainder as its target. Groups fill train until it
//! reaches its target, then validation, then test. A group that overshoots
//! a target stays where it landed; the spill comes out of later parts.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, PartialEq, Debug, thiserror::Error)]
pub enum SplitError {
    #[error("fractions must be positive and sum to 1 (got {0}, {1}, {2})")]
    InvalidFractions(f64, f64, f64),
    #[error("need at least 3 scaffold groups to split, found {0}")]
    TooFewScaffolds(usize),
    #[error("cannot split an empty dataset")]
    EmptyDataset,
}

/// `keys[i]` is the scaffold key of record `i`. Index order within each part
/// follows record order; the assignment uses no randomness.
pub fn scaffold_split(
    keys: &[String],
    fractions: (f64, f64, f64),
) -> Result<SplitIndices, SplitError> {
    let (ft, fv, fs) = fractions;
    if !(ft > 0.0 && fv > 0.0 && fs > 0.0) || ((ft + fv + fs) - 1.0).abs() > 1e-9 {
        return Err(SplitError::InvalidFractions(ft, fv, fs));
    }
    if keys.is_empty() {
        return Err(SplitError::EmptyDataset);
    }

    let mut groups: alloc::collections::BTreeMap<&str, Vec<usize>> =
        alloc::collections::BTreeMap::new();
    for (i, key) in keys.iter().enumerate() {
        groups.entry(key.as_str()).or_default().push(i);
    }
    if groups.len() < 3 {
        return Err(SplitError::TooFewScaffolds(groups.len()));
    }

    let mut ordered: Vec<(&str, Vec<usize>)> = groups.into_iter().collect();
    // Largest group first; ties broken by key so the order is total.
    ordered.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));

    let n = keys.len() as f64;
    let valid_target = ceil_count(n * fv);
    let test_target = ceil_count(n * fs);
    let train_target = keys.len().saturating_sub(valid_target + test_target);

    let mut split = SplitIndices::default();
    for (_, group) in ordered {
        let part = if split.train.len() < train_target {
            &mut split.train
        } else if split.valid.len() < valid_target {
            &mut split.valid
        } else {
            &mut split.test
        };
        part.extend(group);
    }
    split.train.sort_unstable();
    split.valid.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

fn ceil_count(x: f64) -> usize {
    let f = crate::fmath::floor(x);
    let c = if x > f { f + 1.0 } else { f };
    c as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn keys(parts: &[&str]) -> Vec<String> {
        parts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn three_singleton_scaffolds_split_one_each() {
        let split = scaffold_split(&keys(&["a", "b", "c"]), (0.8, 0.1, 0.1)).unwrap();
        assert_eq!(split.train.len(), 1);
        assert_eq!(split.valid.len(), 1);
        assert_eq!(split.test.len(), 1);
    }

    #[test]
    fn groups_stay_whole() {
        let k = keys(&["a", "a", "a", "a", "b", "b", "c", "d", "e", "f"]);
        let split = scaffold_split(&k, (0.6, 0.2, 0.2)).unwrap();
        for part in [&split.train, &split.valid, &split.test] {
            for other in [&split.train, &split.valid, &split.test] {
                if core::ptr::eq(part, other) {
                    continue;
                }
                for &i in part.iter() {
                    for &j in other.iter() {
                        assert_ne!(k[i], k[j], "scaffold straddles parts");
                    }
                }
            }
        }
        let total = split.train.len() + split.valid.len() + split.test.len();
        assert_eq!(total, k.len());
    }

    #[test]
    fn largest_groups_land_in_train() {
        let k = keys(&["a", "a", "a", "a", "a", "b", "b", "c", "d", "e"]);
        let split = scaffold_split(&k, (0.6, 0.2, 0.2)).unwrap();
        // Group "a" (5 members) goes to train first; "b" follows because
        // train is still short of its target of 6, overshooting to 7.
        assert!(split.train.iter().all(|&i| k[i] == "a" || k[i] == "b"));
        assert_eq!(split.train.len(), 7);
        assert_eq!(split.valid.len(), 2);
        assert_eq!(split.test.len(), 1);
    }

    #[test]
    fn deterministic_without_a_seed() {
        let k = keys(&["q", "r", "r", "s", "s", "s", "t", "u", "v", "w"]);
        let a = scaffold_split(&k, (0.8, 0.1, 0.1)).unwrap();
        let b = scaffold_split(&k, (0.8, 0.1, 0.1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            scaffold_split(&keys(&["a", "b"]), (0.8, 0.1, 0.1)),
            Err(SplitError::TooFewScaffolds(2))
        ));
        assert!(matches!(
            scaffold_split(&keys(&["a", "b", "c"]), (0.8, 0.2, 0.1)),
            Err(SplitError::InvalidFractions(..))
        ));
        assert!(matches!(
            scaffold_split(&keys(&["a", "b", "c"]), (1.0, 0.0, 0.0)),
            Err(SplitError::InvalidFractions(..))
        ));
        assert!(matches!(
            scaffold_split(&[], (0.8, 0.1, 0.1)),
            Err(SplitError::EmptyDataset)
        ));
    }

    #[test]
    fn fraction_targets_reserve_valid_and_test() {
        // 10 singletons at 0.8/0.1/0.1: valid and test reserve 1 each.
        let k: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        let split = scaffold_split(&k, (0.8, 0.1, 0.1)).unwrap();
        assert_eq!(
            (split.train.len(), split.valid.len(), split.test.len()),
            (8, 1, 1)
        );
    }
}
