//! `contributions`: reload a checkpoint and report its per-molecule view
//! attention — which representation the model actually listened to — plus
//! the dataset mean.

use crate::artifacts::{atomic_write, load_checkpoint, write_json_pretty, Manifest};
use crate::commands::{build_examples, embed_views, load_ruleset, rule_features, warn_rejects};
use crate::config::RunConfig;
use crate::data::load_dataset;
use anyhow::{Context, Result};
use mvmol_core::model::{component_contributions, FusionModel};
use std::path::Path;

pub fn run(config: &RunConfig, checkpoint_override: Option<&Path>) -> Result<()> {
    let ruleset = load_ruleset(&config.rules.path)?;
    let data = load_dataset(&config.dataset)?;
    warn_rejects(&data);
    let raw = rule_features(&ruleset, &data.records)?;
    let views = embed_views(config, &data.records)?;
    let out = &config.output.dir;

    let default_path = out.join(format!("checkpoint_seed{}.mvml", config.train.seeds[0]));
    let path = checkpoint_override.unwrap_or(&default_path);
    let (meta, params) = load_checkpoint(path)
        .with_context(|| format!("loading {} (run `train` first?)", path.display()))?;
    crate::commands::evaluate::check_compatibility(config, &ruleset, &views, &meta)?;
    let assembled = build_examples(config, &data.records, &raw, &meta.normalization, &views)?;
    let model = FusionModel {
        shape: meta.shape.clone(),
        params,
    };
    let report = component_contributions(&model, &assembled.examples)
        .map_err(|e| anyhow::anyhow!("forward pass failed: {e}"))?;

    write_json_pretty(&out.join("contributions.json"), &report)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "row",
        "smiles",
        "alpha_structure",
        "alpha_task",
        "alpha_rule",
    ])?;
    for (record, alpha) in data.records.iter().zip(&report.per_molecule) {
        writer.write_record([
            record.row.to_string().as_str(),
            &record.smiles,
            &alpha[0].to_string(),
            &alpha[1].to_string(),
            &alpha[2].to_string(),
        ])?;
    }
    writer.flush()?;
    let bytes = writer
        .into_inner()
        .map_err(|e| anyhow::anyhow!("finishing contributions.csv: {e}"))?;
    atomic_write(&out.join("contributions.csv"), &bytes)?;

    let mut manifest = Manifest::new("contributions", &meta.provider_id, &meta.model_id);
    manifest.views = config
        .views
        .enabled()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    manifest.seeds = vec![meta.seed];
    manifest.add_file(out, "contributions.json")?;
    manifest.add_file(out, "contributions.csv")?;
    manifest.write(out)?;

    println!(
        "contributions: mean attention structure={:.4} task={:.4} rule={:.4} over {} molecules",
        report.mean_alpha[0],
        report.mean_alpha[1],
        report.mean_alpha[2],
        data.records.len()
    );
    Ok(())
}
