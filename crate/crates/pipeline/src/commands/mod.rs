//! CLI commands. Every stage recomputes its inputs from the config — load,
//! quarantine, split, and rule evaluation are pure functions of the input
//! files, so stages agree without hidden state; embeddings come out of the
//! durable cache after the first pass.

pub mod contributions;
pub mod embed;
pub mod evaluate;
pub mod featurize;
pub mod prompts;
pub mod train;

use crate::cache::DiskCache;
use crate::config::RunConfig;
use crate::data::{LoadedDataset, Record};
use crate::provider::build_backend;
use anyhow::{bail, Context, Result};
use mvmol_core::model::FeaturizedExample;
use mvmol_core::rules::{
    apply_normalization, evaluate_rules, parse_rules, NormalizationStats, RuleFeatureVector,
    RuleSet,
};
use mvmol_core::split::{scaffold_split, SplitIndices};
use mvmol_core::views::{
    assemble_structure_view, build_structure_prompts, build_task_prompt, Embedder, RetryPolicy,
    ViewKind,
};
use std::path::Path;

pub(crate) fn load_ruleset(path: &Path) -> Result<RuleSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read rule file {}", path.display()))?;
    let ruleset = parse_rules(&text).with_context(|| format!("rule file {}", path.display()))?;
    if ruleset.rules.is_empty() {
        bail!("rule file {} defines no rules", path.display());
    }
    Ok(ruleset)
}

/// Raw (unnormalized) rule features, one vector per accepted record. A rule
/// that cannot be evaluated is a configuration problem, not a row problem,
/// so the first failure aborts with context.
pub(crate) fn rule_features(
    ruleset: &RuleSet,
    records: &[Record],
) -> Result<Vec<RuleFeatureVector>> {
    records
        .iter()
        .map(|r| {
            evaluate_rules(ruleset, &r.molecule, &r.externals)
                .with_context(|| format!("evaluating rules on row {} ({})", r.row, r.smiles))
        })
        .collect()
}

pub(crate) fn split_records(
    data: &LoadedDataset,
    fractions: (f64, f64, f64),
) -> Result<SplitIndices> {
    scaffold_split(&data.scaffold_keys(), fractions).context("splitting by scaffold")
}

/// Text-view vectors for every record, in record order.
pub(crate) struct ViewVectors {
    pub structure: Option<Vec<Vec<f64>>>,
    pub task: Option<Vec<Vec<f64>>>,
    pub provider_id: String,
    pub model_id: String,
    pub prompt_count: usize,
    pub new_cache_entries: usize,
}

/// Embed the enabled text views through the on-disk cache. The rule view
/// never goes through a provider — it is computed, not embedded.
pub(crate) fn embed_views(config: &RunConfig, records: &[Record]) -> Result<ViewVectors> {
    if !config.views.structure && !config.views.task {
        return Ok(ViewVectors {
            structure: None,
            task: None,
            provider_id: "none".into(),
            model_id: "none".into(),
            prompt_count: 0,
            new_cache_entries: 0,
        });
    }
    let backend = build_backend(&config.provider)?;
    let provider_id = backend.provider_id().to_string();
    let model_id = backend.model_id().to_string();
    let cache = DiskCache::open(&config.output.dir.join("embedding_cache"))
        .context("opening the embedding cache")?;
    let before = cache.len();
    let embedder = Embedder::new(
        backend.as_ref(),
        &cache,
        RetryPolicy::default(),
        config.provider.batch_size(),
        |ms| std::thread::sleep(std::time::Duration::from_millis(ms)),
    );

    let mut prompt_count = 0usize;
    let structure = if config.views.structure {
        let mut prompts = Vec::with_capacity(records.len() * 3);
        for r in records {
            prompts.extend(build_structure_prompts(&r.smiles));
        }
        prompt_count += prompts.len();
        let embeddings = embedder
            .embed(&prompts, ViewKind::Structure)
            .context("embedding the structure view")?;
        let mut per_molecule = Vec::with_capacity(records.len());
        for chunk in embeddings.chunks_exact(3) {
            per_molecule
                .push(assemble_structure_view(chunk).context("assembling the structure view")?);
        }
        Some(per_molecule)
    } else {
        None
    };

    let task = if config.views.task {
        let question = config
            .views
            .task_question
            .as_deref()
            .expect("validated: task view requires a question");
        let prompts: Vec<String> = records
            .iter()
            .map(|r| build_task_prompt(&r.smiles, question, config.views.wrapper_style))
            .collect();
        prompt_count += prompts.len();
        let embeddings = embedder
            .embed(&prompts, ViewKind::Task)
            .context("embedding the task view")?;
        Some(embeddings.into_iter().map(|e| e.vector).collect())
    } else {
        None
    };

    Ok(ViewVectors {
        structure,
        task,
        provider_id,
        model_id,
        prompt_count,
        new_cache_entries: cache.len().saturating_sub(before),
    })
}

/// Per-record model inputs plus the `(view, width)` list the model shape
/// needs.
pub(crate) struct AssembledExamples {
    pub examples: Vec<FeaturizedExample>,
    pub view_dims: Vec<(ViewKind, usize)>,
}

/// Assemble per-record model inputs in view slot order, normalizing the rule
/// view with the supplied (training-set) statistics.
pub(crate) fn build_examples(
    config: &RunConfig,
    records: &[Record],
    raw_rules: &[RuleFeatureVector],
    stats: &NormalizationStats,
    views: &ViewVectors,
) -> Result<AssembledExamples> {
    let mut examples = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate() {
        let mut vectors = Vec::new();
        if let Some(structure) = &views.structure {
            vectors.push(structure[i].clone());
        }
        if let Some(task) = &views.task {
            vectors.push(task[i].clone());
        }
        if config.views.rule {
            let normalized = apply_normalization(stats, &raw_rules[i])
                .with_context(|| format!("normalizing rule features on row {}", record.row))?;
            vectors.push(normalized.values);
        }
        examples.push(FeaturizedExample {
            views: vectors,
            labels: record.labels.clone(),
        });
    }

    let mut dims = Vec::new();
    if let Some(structure) = &views.structure {
        dims.push((ViewKind::Structure, structure[0].len()));
    }
    if let Some(task) = &views.task {
        dims.push((ViewKind::Task, task[0].len()));
    }
    if config.views.rule {
        dims.push((ViewKind::Rule, stats.feature_len));
    }
    Ok(AssembledExamples {
        examples,
        view_dims: dims,
    })
}

pub(crate) fn subset(examples: &[FeaturizedExample], idx: &[usize]) -> Vec<FeaturizedExample> {
    idx.iter().map(|&i| examples[i].clone()).collect()
}

/// Fit rule normalization on the training rows only.
pub(crate) fn fit_train_normalization(
    ruleset: &RuleSet,
    raw_rules: &[RuleFeatureVector],
    split: &SplitIndices,
) -> NormalizationStats {
    let train: Vec<RuleFeatureVector> = split.train.iter().map(|&i| raw_rules[i].clone()).collect();
    mvmol_core::rules::fit_normalization(ruleset, &train)
}

/// Report quarantined rows as a warning; they never fail the command.
pub(crate) fn warn_rejects(data: &LoadedDataset) {
    if !data.rejects.is_empty() {
        eprintln!(
            "warning: rejected {} of {} rows (see rejects.csv)",
            data.rejects.len(),
            data.records.len() + data.rejects.len()
        );
    }
}
