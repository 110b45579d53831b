//! `embed`: build the structure/task prompts for every accepted molecule and
//! run them through the provider behind the durable cache. A second run with
//! the same inputs is served entirely from disk.

use crate::artifacts::{write_jsonl, Manifest};
use crate::commands::{embed_views, warn_rejects};
use crate::config::RunConfig;
use crate::data::{load_dataset, Record};
use anyhow::Result;
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct ViewRow<'a> {
    row: usize,
    smiles: &'a str,
    vector: &'a [f64],
}

fn write_view_jsonl(path: &Path, records: &[Record], vectors: &[Vec<f64>]) -> Result<()> {
    let rows: Vec<ViewRow> = records
        .iter()
        .zip(vectors)
        .map(|(r, v)| ViewRow {
            row: r.row,
            smiles: &r.smiles,
            vector: v,
        })
        .collect();
    write_jsonl(path, &rows)
}

pub fn run(config: &RunConfig) -> Result<()> {
    let data = load_dataset(&config.dataset)?;
    warn_rejects(&data);
    let views = embed_views(config, &data.records)?;

    let out = &config.output.dir;
    let mut manifest = Manifest::new("embed", &views.provider_id, &views.model_id);
    manifest.views = config
        .views
        .enabled()
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    manifest.seeds = config.train.seeds.clone();
    if let Some(structure) = &views.structure {
        write_view_jsonl(&out.join("views_structure.jsonl"), &data.records, structure)?;
        manifest.add_file(out, "views_structure.jsonl")?;
    }
    if let Some(task) = &views.task {
        write_view_jsonl(&out.join("views_task.jsonl"), &data.records, task)?;
        manifest.add_file(out, "views_task.jsonl")?;
    }
    manifest.write(out)?;

    if views.prompt_count == 0 {
        println!("embed: no text views enabled; nothing to embed");
    } else {
        println!(
            "embed: {} prompts for {} molecules via {} ({}); {} new cache entries",
            views.prompt_count,
            data.records.len(),
            views.provider_id,
            views.model_id,
            views.new_cache_entries
        );
    }
    Ok(())
}
