//! `prompts`: write the exact prompt texts the pipeline sends — the three
//! structure insights and the task wrapper for the first accepted molecule,
//! and the two rule-generation prompts — one file per prompt, byte for byte.
//! An optional selector narrows the output to one prompt family.

use crate::artifacts::atomic_write;
use crate::commands::warn_rejects;
use crate::config::RunConfig;
use crate::data::load_dataset;
use anyhow::{bail, Result};
use mvmol_core::rules::{
    build_data_rule_prompt, build_scientific_rule_prompt, sample_data_subsets,
};
use mvmol_core::views::{build_structure_prompts, build_task_prompt};

/// One family of prompt files. Without a selector the command writes every
/// family the configuration supports, noting the ones it skips; with a
/// selector, missing prerequisites are hard errors instead.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PromptKind {
    Structure,
    Task,
    RulesSci,
    RulesData,
}

pub fn run(config: &RunConfig, only: Option<PromptKind>) -> Result<()> {
    let data = load_dataset(&config.dataset)?;
    warn_rejects(&data);
    let first = &data.records[0];
    let dir = config.output.dir.join("prompts");
    let mut written: Vec<String> = Vec::new();
    let wants = |kind: PromptKind| only.is_none() || only == Some(kind);
    let forced = |kind: PromptKind| only == Some(kind);

    if wants(PromptKind::Structure) && (config.views.structure || forced(PromptKind::Structure)) {
        for (i, prompt) in build_structure_prompts(&first.smiles).iter().enumerate() {
            let name = format!("structure_{}.txt", i + 1);
            atomic_write(&dir.join(&name), prompt.as_bytes())?;
            written.push(name);
        }
    }
    if wants(PromptKind::Task) && (config.views.task || forced(PromptKind::Task)) {
        match config.views.task_question.as_deref() {
            Some(question) => {
                let prompt = build_task_prompt(&first.smiles, question, config.views.wrapper_style);
                atomic_write(&dir.join("task.txt"), prompt.as_bytes())?;
                written.push("task.txt".to_string());
            }
            // Reachable only under the selector: enabling the task view
            // without a question fails configuration validation.
            None => bail!("the task prompt needs views.task_question to be set"),
        }
    }

    if wants(PromptKind::RulesSci) {
        match &config.prompts.task_description {
            Some(description) => {
                let prompt =
                    build_scientific_rule_prompt(description, config.prompts.scientific_rule_count);
                atomic_write(&dir.join("rules_scientific.txt"), prompt.as_bytes())?;
                written.push("rules_scientific.txt".to_string());
            }
            None if forced(PromptKind::RulesSci) => {
                bail!("the scientific rule prompt needs prompts.task_description to be set")
            }
            None => {
                eprintln!("note: prompts.task_description not set; skipping rules_scientific.txt")
            }
        }
    }

    if wants(PromptKind::RulesData) {
        match &config.prompts.label_meaning {
            Some(meaning) => {
                let labeled: Vec<(String, f64)> = data
                    .records
                    .iter()
                    .filter_map(|r| {
                        r.labels
                            .first()
                            .copied()
                            .flatten()
                            .map(|y| (r.smiles.clone(), y))
                    })
                    .collect();
                match sample_data_subsets(
                    &labeled,
                    config.prompts.data_subset_count,
                    config.prompts.data_subset_size,
                    config.prompts.data_subset_seed,
                ) {
                    Ok(subsets) => {
                        for (k, subset) in subsets.iter().enumerate() {
                            let prompt = build_data_rule_prompt(
                                subset,
                                meaning,
                                config.prompts.data_rule_count,
                            );
                            let name = format!("rules_data_{}.txt", k + 1);
                            atomic_write(&dir.join(&name), prompt.as_bytes())?;
                            written.push(name);
                        }
                    }
                    Err(e) if forced(PromptKind::RulesData) => {
                        bail!("cannot sample data-pattern subsets: {e}")
                    }
                    Err(e) => eprintln!("note: skipping data-pattern prompts: {e}"),
                }
            }
            None if forced(PromptKind::RulesData) => {
                bail!("the data-pattern prompt needs prompts.label_meaning to be set")
            }
            None => eprintln!("note: prompts.label_meaning not set; skipping data-pattern prompts"),
        }
    }

    for name in &written {
        println!("prompts: wrote prompts/{name}");
    }
    Ok(())
}
