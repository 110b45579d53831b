//! The fixed prompt texts for the structure and task views. These strings
//! are part of the pipeline's identity — embeddings are cached by prompt
//! hash — so they are frozen by golden tests and must not drift.

use alloc::format;
use alloc::string::String;

/// The three structure-insight questions, asked of every molecule in this
/// order. Note the typographic apostrophe in the first question.
pub const STRUCTURE_INSIGHT_QUESTIONS: [&str; 3] = [
    "How does the molecule\u{2019}s 3D shape change in different environments, and what are the effects of these changes?",
    "What are the key intermolecular forces that govern the behavior of this molecule in various contexts?",
    "How does the molecule contribute to the overall chemical equilibrium in its different environments?",
];

/// Structure-view prompts: each insight question over the molecule, question
/// first, SMILES on the next line.
pub fn build_structure_prompts(smiles: &str) -> [String; 3] {
    STRUCTURE_INSIGHT_QUESTIONS.map(|q| format!("{q}\n{smiles}"))
}

/// How the SMILES is delimited inside the task prompt. Galactica-style tags
/// match models trained with special SMILES markers; `Plain` interpolates
/// the string bare for every other provider.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WrapperStyle {
    GalacticaSmilesTags,
    Plain,
}

/// Task-view prompt: the SMILES presented with the task question.
pub fn build_task_prompt(smiles: &str, task_question: &str, style: WrapperStyle) -> String {
    match style {
        WrapperStyle::GalacticaSmilesTags => format!(
            "Here is a SMILES formula: [START_I_SMILES]{smiles}[END_I_SMILES]\n\nQuestion: {task_question}"
        ),
        WrapperStyle::Plain => {
            format!("Here is a SMILES formula: {smiles}\n\nQuestion: {task_question}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_prompts_pair_question_with_smiles() {
        let prompts = build_structure_prompts("CCO");
        assert_eq!(prompts.len(), 3);
        for (prompt, question) in prompts.iter().zip(STRUCTURE_INSIGHT_QUESTIONS) {
            assert_eq!(*prompt, format!("{question}\nCCO"));
        }
    }

    #[test]
    fn first_question_uses_typographic_apostrophe() {
        assert!(STRUCTURE_INSIGHT_QUESTIONS[0].contains("molecule\u{2019}s"));
        assert!(!STRUCTURE_INSIGHT_QUESTIONS[0].contains("molecule's"));
    }

    #[test]
    fn task_prompt_with_tags() {
        let p = build_task_prompt(
            "C1=CC=C(C=C1)C(=O)O",
            "Will the chemical compound penetrate the blood-brain barrier?",
            WrapperStyle::GalacticaSmilesTags,
        );
        assert_eq!(
            p,
            "Here is a SMILES formula: [START_I_SMILES]C1=CC=C(C=C1)C(=O)O[END_I_SMILES]\n\n\
             Question: Will the chemical compound penetrate the blood-brain barrier?"
        );
    }

    #[test]
    fn task_prompt_plain() {
        let p = build_task_prompt("CCO", "Is it toxic?", WrapperStyle::Plain);
        assert_eq!(p, "Here is a SMILES formula: CCO\n\nQuestion: Is it toxic?");
    }
}
