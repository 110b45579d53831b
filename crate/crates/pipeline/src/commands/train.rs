//! `train`: assemble the enabled views per molecule and fit one fusion model
//! per configured seed. Checkpoints and epoch logs are byte-deterministic
//! functions of the inputs and the seed; wall-clock timing goes to stderr
//! only.

use crate::artifacts::{save_checkpoint, write_jsonl, CheckpointMeta, Manifest};
use crate::commands::{
    build_examples, embed_views, fit_train_normalization, load_ruleset, rule_features,
    split_records, subset, warn_rejects,
};
use crate::config::{head_for, RunConfig};
use crate::data::load_dataset;
use anyhow::{Context, Result};
use mvmol_core::model::{AdamConfig, ModelShape, TaskKind, TrainConfig};

pub fn run(config: &RunConfig) -> Result<()> {
    let ruleset = load_ruleset(&config.rules.path)?;
    let data = load_dataset(&config.dataset)?;
    warn_rejects(&data);
    let raw = rule_features(&ruleset, &data.records)?;
    let split = split_records(&data, config.split.fractions())?;
    let stats = fit_train_normalization(&ruleset, &raw, &split);
    let views = embed_views(config, &data.records)?;
    let assembled = build_examples(config, &data.records, &raw, &stats, &views)?;
    let train_examples = subset(&assembled.examples, &split.train);
    let valid_examples = subset(&assembled.examples, &split.valid);

    let head = head_for(config);
    let task = TaskKind::for_head(head);
    let shape = ModelShape {
        views: assembled.view_dims,
        hidden_dim: config.train.hidden_dim,
        mlp_hidden: config.train.mlp_hidden.clone(),
        head,
    };

    let out = &config.output.dir;
    let mut manifest = Manifest::new("train", &views.provider_id, &views.model_id);
    manifest.views = config
        .views
        .enabled()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    manifest.seeds = config.train.seeds.clone();

    for &seed in &config.train.seeds {
        let train_config = TrainConfig {
            epochs: config.train.epochs,
            batch_size: config.train.batch_size,
            seed,
            init_scale: config.train.init_scale,
            adam: AdamConfig {
                learning_rate: config.train.learning_rate,
                ..AdamConfig::default()
            },
            patience: config.train.patience_option(),
        };
        let started = std::time::Instant::now();
        let outcome = mvmol_core::model::train(
            shape.clone(),
            &train_examples,
            &valid_examples,
            &train_config,
        )
        .with_context(|| format!("training with seed {seed}"))?;
        eprintln!(
            "train: seed {seed} took {:.1}s",
            started.elapsed().as_secs_f64()
        );

        let meta = CheckpointMeta {
            shape: shape.clone(),
            task,
            seed,
            label_columns: config.dataset.label_columns.clone(),
            rule_ids: ruleset.rules.iter().map(|r| r.id.clone()).collect(),
            normalization: stats.clone(),
            provider_id: views.provider_id.clone(),
            model_id: views.model_id.clone(),
        };
        let checkpoint_name = format!("checkpoint_seed{seed}.mvml");
        save_checkpoint(&out.join(&checkpoint_name), &meta, &outcome.model.params)?;
        let log_name = format!("train_log_seed{seed}.jsonl");
        write_jsonl(&out.join(&log_name), &outcome.history)?;
        manifest.add_file(out, &checkpoint_name)?;
        manifest.add_file(out, &log_name)?;

        match (outcome.best_epoch, outcome.best_metric) {
            (Some(epoch), Some(metric)) => println!(
                "train: seed {seed}: best epoch {epoch}, valid {} {:.6}{}",
                task.metric_name(),
                metric,
                if outcome.stopped_early {
                    " (stopped early)"
                } else {
                    ""
                }
            ),
            _ => println!(
                "train: seed {seed}: ran {} epochs (no validation set), final train loss {:.6}",
                outcome.history.len(),
                outcome
                    .history
                    .last()
                    .map(|r| r.train_loss)
                    .unwrap_or(f64::NAN)
            ),
        }
    }
    manifest.write(out)?;
    Ok(())
}
