//! Prompt builders for eliciting rules from a language model, and the
//! seeded sampler that carves labeled data into prompt-sized subsets. The
//! templates are fixed text; golden tests freeze them byte for byte.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Prompt asking for rules grounded in domain knowledge of the task.
/// `rule_count` of 1 reads "1 rule"; the surrounding text is otherwise
/// fixed. `task_description` must be non-empty.
pub fn build_scientific_rule_prompt(task_description: &str, rule_count: usize) -> String {
    assert!(
        !task_description.trim().is_empty(),
        "task description must be non-empty"
    );
    assert!(rule_count >= 1, "rule count must be at least 1");
    format!(
        "Assume you are an experienced Chemist. Please come up with {} that are important to {}.",
        pluralize_rules(rule_count),
        task_description
    )
}

/// Prompt asking for rules inferred from labeled examples. `label_meaning`
/// is the property named by label 1 (e.g. "BBBP"); the subset is rendered
/// one `SMILES label` pair per line after the instruction.
pub fn build_data_rule_prompt(
    subset: &[(String, f64)],
    label_meaning: &str,
    rule_count: usize,
) -> String {
    assert!(
        !label_meaning.trim().is_empty(),
        "label meaning must be non-empty"
    );
    assert!(rule_count >= 1, "rule count must be at least 1");
    assert!(!subset.is_empty(), "subset must be non-empty");
    let mut prompt = format!(
        "Assume you are a very experienced Chemist. In the following data, with label 1, \
         it means the smiles string is {label_meaning}. With label 0, it means the smiles \
         string is not {label_meaning}. Please infer step-by-step to come up with {} that \
         directly relate the properties/structures of a molecule to predict if it can be \
         {label_meaning}.",
        pluralize_rules(rule_count),
    );
    for (smiles, label) in subset {
        prompt.push('\n');
        prompt.push_str(smiles);
        prompt.push(' ');
        let _ = core::fmt::write(&mut prompt, format_args!("{label}"));
    }
    prompt
}

fn pluralize_rules(n: usize) -> String {
    if n == 1 {
        String::from("1 rule")
    } else {
        format!("{n} rules")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, thiserror::Error)]
pub enum SubsetError {
    #[error("subset size {size} exceeds the {available} records available")]
    SubsetTooLarge { size: usize, available: usize },
    #[error("subset count and size must be at least 1")]
    EmptyRequest,
}

/// Draw `count` subsets of `size` records each, without replacement within a
/// subset, seeded. The same `(records, count, size, seed)` always yields the
/// same subsets in the same order.
pub fn sample_data_subsets(
    records: &[(String, f64)],
    count: usize,
    size: usize,
    seed: u64,
) -> Result<Vec<Vec<(String, f64)>>, SubsetError> {
    if count == 0 || size == 0 {
        return Err(SubsetError::EmptyRequest);
    }
    if size > records.len() {
        return Err(SubsetError::SubsetTooLarge {
            size,
            available: records.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets = (0..count)
        .map(|_| {
            rand::seq::index::sample(&mut rng, records.len(), size)
                .iter()
                .map(|i| records[i].clone())
                .collect()
        })
        .collect();
    Ok(subsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn scientific_prompt_text() {
        assert_eq!(
            build_scientific_rule_prompt("predicting blood-brain barrier penetration", 20),
            "Assume you are an experienced Chemist. Please come up with 20 rules that are \
             important to predicting blood-brain barrier penetration."
        );
    }

    #[test]
    fn one_rule_reads_singular() {
        let p = build_scientific_rule_prompt("toxicity", 1);
        assert!(p.contains("come up with 1 rule that are important"));
        assert!(!p.contains("1 rules"));
    }

    #[test]
    #[should_panic(expected = "task description must be non-empty")]
    fn empty_task_is_a_precondition_violation() {
        build_scientific_rule_prompt("", 20);
    }

    #[test]
    fn data_prompt_renders_pairs_line_per_line() {
        let subset = [("CCO".to_string(), 1.0), ("c1ccccc1".to_string(), 0.0)];
        let p = build_data_rule_prompt(&subset, "BBBP", 5);
        assert!(p.starts_with("Assume you are a very experienced Chemist."));
        assert!(p.contains("with label 1, it means the smiles string is BBBP."));
        assert!(p.contains("With label 0, it means the smiles string is not BBBP."));
        assert!(p.contains("5 rules that directly relate the properties/structures"));
        assert!(p.ends_with("\nCCO 1\nc1ccccc1 0"));
    }

    #[test]
    fn sampling_is_deterministic_and_without_replacement() {
        let records: Vec<(String, f64)> =
            (0..10).map(|i| (format!("C{i}"), (i % 2) as f64)).collect();
        let a = sample_data_subsets(&records, 3, 4, 7).unwrap();
        let b = sample_data_subsets(&records, 3, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        for subset in &a {
            assert_eq!(subset.len(), 4);
            let mut names: Vec<&str> = subset.iter().map(|(s, _)| s.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            assert_eq!(names.len(), 4, "duplicate record within a subset");
        }
        let c = sample_data_subsets(&records, 3, 4, 8).unwrap();
        assert_ne!(a, c, "different seeds should differ");
    }

    #[test]
    fn full_size_subset_is_a_permutation() {
        let records: Vec<(String, f64)> = (0..10).map(|i| (format!("C{i}"), 1.0)).collect();
        let subsets = sample_data_subsets(&records, 1, 10, 0).unwrap();
        let mut got: Vec<&str> = subsets[0].iter().map(|(s, _)| s.as_str()).collect();
        got.sort_unstable();
        let mut want: Vec<&str> = records.iter().map(|(s, _)| s.as_str()).collect();
        want.sort_unstable();
        assert_eq!(got, want);
    }

    #[test]
    fn oversized_subset_is_an_error() {
        let records = [("C".to_string(), 1.0)];
        assert_eq!(
            sample_data_subsets(&records, 1, 2, 0),
            Err(SubsetError::SubsetTooLarge {
                size: 2,
                available: 1
            })
        );
    }

    #[test]
    fn labels_render_as_integers_when_integral() {
        let subset = [("CC".to_string(), 0.0), ("CN".to_string(), 1.0)];
        let p = build_data_rule_prompt(&subset, "toxic", 2);
        assert!(p.ends_with("\nCC 0\nCN 1"));
    }
}
