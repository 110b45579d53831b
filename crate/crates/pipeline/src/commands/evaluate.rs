//! `evaluate`: reload checkpoints and score them on the validation and test
//! splits. Rule normalization comes from the checkpoint — the statistics fit
//! at training time — never refit on evaluation data.

use crate::artifacts::{load_checkpoint, write_json_pretty, CheckpointMeta, Manifest};
use crate::commands::{
    build_examples, embed_views, load_ruleset, rule_features, split_records, warn_rejects,
    ViewVectors,
};
use crate::config::RunConfig;
use crate::data::{evaluate_predictions, load_dataset, EvalSummary};
use anyhow::{bail, Context, Result};
use mvmol_core::model::{predict, FeaturizedExample, FusionModel};
use mvmol_core::rules::RuleSet;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct RunMetrics {
    seed: u64,
    checkpoint: String,
    valid: EvalSummary,
    test: EvalSummary,
}

#[derive(Serialize)]
struct MetricsFile {
    dataset: String,
    metric: String,
    runs: Vec<RunMetrics>,
}

/// Catch featurization drift before it turns into silent garbage: the rule
/// file, the enabled views, and the embedding identity must match what the
/// checkpoint was trained with.
pub(crate) fn check_compatibility(
    config: &RunConfig,
    ruleset: &RuleSet,
    views: &ViewVectors,
    meta: &CheckpointMeta,
) -> Result<()> {
    let current_rules: Vec<String> = ruleset.rules.iter().map(|r| r.id.clone()).collect();
    if current_rules != meta.rule_ids {
        bail!(
            "the rule file no longer matches this checkpoint (trained with rules [{}], file defines [{}])",
            meta.rule_ids.join(", "),
            current_rules.join(", ")
        );
    }
    let current_views: Vec<&str> = config.views.enabled().iter().map(|v| v.name()).collect();
    let trained_views: Vec<&str> = meta.shape.views.iter().map(|(v, _)| v.name()).collect();
    if current_views != trained_views {
        bail!(
            "this checkpoint was trained with views {}; the current run enables {} (use --views {})",
            trained_views.join(","),
            current_views.join(","),
            trained_views.join(",")
        );
    }
    if meta.provider_id != "none"
        && views.provider_id != "none"
        && (views.provider_id != meta.provider_id || views.model_id != meta.model_id)
    {
        bail!(
            "embedding provider mismatch: checkpoint was trained with {} ({}), this run uses {} ({})",
            meta.provider_id,
            meta.model_id,
            views.provider_id,
            views.model_id
        );
    }
    Ok(())
}

fn score_split(
    model: &FusionModel,
    examples: &[FeaturizedExample],
    idx: &[usize],
    meta: &CheckpointMeta,
) -> Result<EvalSummary> {
    let mut predictions = Vec::with_capacity(idx.len());
    let mut labels = Vec::with_capacity(idx.len());
    for &i in idx {
        let prediction = predict(model, &examples[i].views)
            .map_err(|e| anyhow::anyhow!("forward pass failed: {e}"))?;
        predictions.push(prediction.y_hat);
        labels.push(examples[i].labels.clone());
    }
    Ok(evaluate_predictions(
        meta.task,
        &meta.label_columns,
        &predictions,
        &labels,
    ))
}

fn display_mean(summary: &EvalSummary) -> String {
    match summary.task_mean {
        Some(v) => format!("{v:.6}"),
        None => "n/a".to_string(),
    }
}

pub fn run(config: &RunConfig, checkpoint_override: Option<&Path>) -> Result<()> {
    let ruleset = load_ruleset(&config.rules.path)?;
    let data = load_dataset(&config.dataset)?;
    warn_rejects(&data);
    let raw = rule_features(&ruleset, &data.records)?;
    let split = split_records(&data, config.split.fractions())?;
    let views = embed_views(config, &data.records)?;
    let out = &config.output.dir;

    let checkpoint_paths: Vec<PathBuf> = match checkpoint_override {
        Some(p) => vec![p.to_path_buf()],
        None => config
            .train
            .seeds
            .iter()
            .map(|s| out.join(format!("checkpoint_seed{s}.mvml")))
            .collect(),
    };

    let mut runs = Vec::new();
    let mut metric_name = None;
    let mut provider = ("none".to_string(), "none".to_string());
    for path in &checkpoint_paths {
        let (meta, params) = load_checkpoint(path)
            .with_context(|| format!("loading {} (run `train` first?)", path.display()))?;
        check_compatibility(config, &ruleset, &views, &meta)?;
        let assembled = build_examples(config, &data.records, &raw, &meta.normalization, &views)?;
        let model = FusionModel {
            shape: meta.shape.clone(),
            params,
        };
        let valid = score_split(&model, &assembled.examples, &split.valid, &meta)?;
        let test = score_split(&model, &assembled.examples, &split.test, &meta)?;
        println!(
            "evaluate: seed {}: test {} {} (valid {})",
            meta.seed,
            meta.task.metric_name(),
            display_mean(&test),
            display_mean(&valid)
        );
        metric_name = Some(meta.task.metric_name().to_string());
        provider = (meta.provider_id.clone(), meta.model_id.clone());
        let checkpoint = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        runs.push(RunMetrics {
            seed: meta.seed,
            checkpoint,
            valid,
            test,
        });
    }

    let metrics = MetricsFile {
        dataset: config.dataset.name.clone(),
        metric: metric_name.unwrap_or_default(),
        runs,
    };
    write_json_pretty(&out.join("metrics.json"), &metrics)?;

    let mut manifest = Manifest::new("evaluate", &provider.0, &provider.1);
    manifest.views = config
        .views
        .enabled()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    manifest.seeds = config.train.seeds.clone();
    manifest.add_file(out, "metrics.json")?;
    manifest.write(out)?;
    Ok(())
}
