//! `featurize`: compile the rule file, evaluate it over every accepted
//! molecule, fix the scaffold split, and fit train-set normalization.

use crate::artifacts::{atomic_write, write_json_pretty, Manifest};
use crate::commands::{
    fit_train_normalization, load_ruleset, rule_features, split_records, warn_rejects,
};
use crate::config::RunConfig;
use crate::data::{load_dataset, Record, RejectedRow};
use anyhow::{Context, Result};
use mvmol_core::rules::{RuleFeatureVector, RuleSet};
use std::path::Path;

pub fn run(config: &RunConfig) -> Result<()> {
    let ruleset = load_ruleset(&config.rules.path)?;
    let data = load_dataset(&config.dataset)?;
    warn_rejects(&data);
    let raw = rule_features(&ruleset, &data.records)?;
    let split = split_records(&data, config.split.fractions())?;
    let stats = fit_train_normalization(&ruleset, &raw, &split);

    let out = &config.output.dir;
    write_features_csv(&out.join("features.csv"), &ruleset, &data.records, &raw)?;
    write_rejects_csv(&out.join("rejects.csv"), &data.rejects)?;
    write_json_pretty(&out.join("stats.json"), &stats)?;
    write_json_pretty(
        &out.join("split.json"),
        &serde_json::json!({
            "train": split.train,
            "valid": split.valid,
            "test": split.test,
        }),
    )?;

    let mut manifest = Manifest::new("featurize", "none", "none");
    manifest.views = config
        .views
        .enabled()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    manifest.seeds = config.train.seeds.clone();
    for name in ["features.csv", "rejects.csv", "stats.json", "split.json"] {
        manifest.add_file(out, name)?;
    }
    manifest.write(out)?;

    println!(
        "featurize: {} molecules accepted, {} rejected",
        data.records.len(),
        data.rejects.len()
    );
    println!(
        "featurize: {} rule features ({} numeric columns normalized)",
        ruleset.feature_len(),
        stats.columns.len()
    );
    println!(
        "featurize: split train/valid/test = {}/{}/{} by {} scaffolds",
        split.train.len(),
        split.valid.len(),
        split.test.len(),
        {
            let mut keys = data.scaffold_keys();
            keys.sort();
            keys.dedup();
            keys.len()
        }
    );
    Ok(())
}

/// Raw rule features, one row per molecule, one column per rule. Values are
/// written with Rust's shortest-round-trip float formatting, so reading the
/// file back reproduces every bit.
fn write_features_csv(
    path: &Path,
    ruleset: &RuleSet,
    records: &[Record],
    raw: &[RuleFeatureVector],
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["row".to_string(), "smiles".to_string()];
    header.extend(ruleset.rules.iter().map(|r| r.id.clone()));
    writer.write_record(&header)?;
    for (record, features) in records.iter().zip(raw) {
        let mut cells = vec![record.row.to_string(), record.smiles.clone()];
        cells.extend(features.values.iter().map(|v| v.to_string()));
        writer.write_record(&cells)?;
    }
    writer.flush()?;
    let bytes = writer
        .into_inner()
        .map_err(|e| anyhow::anyhow!("finishing features.csv: {e}"))?;
    atomic_write(path, &bytes).context("writing features.csv")
}

fn write_rejects_csv(path: &Path, rejects: &[RejectedRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["row", "smiles", "error"])?;
    for r in rejects {
        writer.write_record([r.row.to_string().as_str(), &r.smiles, &r.error])?;
    }
    writer.flush()?;
    let bytes = writer
        .into_inner()
        .map_err(|e| anyhow::anyhow!("finishing rejects.csv: {e}"))?;
    atomic_write(path, &bytes).context("writing rejects.csv")
}
