//! Dataset ingestion. Rows with unparseable SMILES or bad cells are
//! quarantined into a rejects report — counted, never silently dropped —
//! and every accepted record carries its scaffold key so the split is a
//! pure function of the file.

use crate::config::DatasetConfig;
use mvmol_core::chem::{canonical_key, murcko_scaffold, Molecule};
use mvmol_core::metrics::{rmse, roc_auc, MetricError};
use mvmol_core::model::TaskKind;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct Record {
    /// 1-based data row in the source file (header not counted).
    pub row: usize,
    pub smiles: String,
    pub molecule: Molecule,
    pub labels: Vec<Option<f64>>,
    pub externals: BTreeMap<String, f64>,
    pub scaffold_key: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RejectedRow {
    pub row: usize,
    pub smiles: String,
    pub error: String,
}

#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub records: Vec<Record>,
    pub rejects: Vec<RejectedRow>,
}

impl LoadedDataset {
    pub fn scaffold_keys(&self) -> Vec<String> {
        self.records
            .iter()
            .map(|r| r.scaffold_key.clone())
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("column `{0}` is missing from the header")]
    MissingColumn(String),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("every one of the {0} data rows was rejected")]
    AllRowsRejected(usize),
    #[error("the file has no data rows")]
    NoRows,
}

/// Load and validate a dataset. Cell-level problems reject the row;
/// file-level problems fail the load.
pub fn load_dataset(spec: &DatasetConfig) -> Result<LoadedDataset, DataError> {
    let path: &Path = &spec.path;
    let file = std::fs::File::open(path).map_err(|source| DataError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(spec.delimiter as u8)
        .flexible(false)
        .from_reader(file);

    let headers = reader.headers()?.clone();
    let column = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let smiles_idx = column(&spec.smiles_column)?;
    let label_idx: Vec<usize> = spec
        .label_columns
        .iter()
        .map(|c| column(c))
        .collect::<Result<_, _>>()?;
    let external_idx: Vec<(String, usize)> = spec
        .external_descriptor_columns
        .iter()
        .map(|c| column(c).map(|i| (c.clone(), i)))
        .collect::<Result<_, _>>()?;

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut rows = 0usize;
    for (i, result) in reader.records().enumerate() {
        let row = i + 1;
        rows += 1;
        let csv_row = result?;
        let smiles = csv_row.get(smiles_idx).unwrap_or("").trim().to_string();
        let mut reject = |error: String| {
            rejects.push(RejectedRow {
                row,
                smiles: smiles.clone(),
                error,
            });
        };

        let molecule = match Molecule::from_smiles(&smiles) {
            Ok(m) => m,
            Err(e) => {
                reject(e.to_string());
                continue;
            }
        };

        let mut labels = Vec::with_capacity(label_idx.len());
        let mut label_error = None;
        for (&idx, name) in label_idx.iter().zip(&spec.label_columns) {
            let cell = csv_row.get(idx).unwrap_or("").trim();
            if cell.is_empty() || cell == spec.missing_label_token {
                labels.push(None);
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) => {
                    if spec.task_kind == TaskKind::Classification && v != 0.0 && v != 1.0 {
                        label_error = Some(format!("label `{name}`: `{cell}` is not 0 or 1"));
                        break;
                    }
                    labels.push(Some(v));
                }
                Err(_) => {
                    label_error = Some(format!("label `{name}`: `{cell}` is not a number"));
                    break;
                }
            }
        }
        if let Some(e) = label_error {
            reject(e);
            continue;
        }

        let mut externals = BTreeMap::new();
        let mut external_error = None;
        for (name, idx) in &external_idx {
            let cell = csv_row.get(*idx).unwrap_or("").trim();
            match cell.parse::<f64>() {
                Ok(v) => {
                    externals.insert(name.clone(), v);
                }
                Err(_) => {
                    external_error = Some(format!("external `{name}`: `{cell}` is not a number"));
                    break;
                }
            }
        }
        if let Some(e) = external_error {
            reject(e);
            continue;
        }

        let scaffold_key = canonical_key(&murcko_scaffold(&molecule));
        records.push(Record {
            row,
            smiles,
            molecule,
            labels,
            externals,
            scaffold_key,
        });
    }

    if rows == 0 {
        return Err(DataError::NoRows);
    }
    if records.is_empty() {
        return Err(DataError::AllRowsRejected(rows));
    }
    Ok(LoadedDataset { records, rejects })
}

/// Per-task evaluation of one model's predictions on one split.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct TaskMetric {
    pub task: String,
    /// Absent when the task cannot be evaluated (see `note`).
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct EvalSummary {
    pub metric: String,
    pub per_task: Vec<TaskMetric>,
    /// Mean over evaluable tasks; absent when none were evaluable.
    pub task_mean: Option<f64>,
}

/// Score predictions against labels. Classification reports per-task
/// ROC-AUC with single-class tasks flagged and excluded from the mean;
/// regression reports RMSE over every labeled output.
pub fn evaluate_predictions(
    task_kind: TaskKind,
    label_names: &[String],
    predictions: &[Vec<f64>],
    labels: &[Vec<Option<f64>>],
) -> EvalSummary {
    let mut per_task = Vec::with_capacity(label_names.len());
    for (t, name) in label_names.iter().enumerate() {
        let mut pred = Vec::new();
        let mut truth = Vec::new();
        for (p_row, l_row) in predictions.iter().zip(labels) {
            if let Some(y) = l_row.get(t).copied().flatten() {
                pred.push(p_row[t]);
                truth.push(y);
            }
        }
        let outcome = match task_kind {
            TaskKind::Classification => {
                let flags: Vec<bool> = truth.iter().map(|&y| y > 0.5).collect();
                roc_auc(&pred, &flags)
            }
            TaskKind::Regression => rmse(&pred, &truth),
        };
        per_task.push(match outcome {
            Ok(v) => TaskMetric {
                task: name.clone(),
                value: Some(v),
                note: None,
            },
            Err(e) => TaskMetric {
                task: name.clone(),
                value: None,
                note: Some(not_evaluable(&e)),
            },
        });
    }
    let values: Vec<f64> = per_task.iter().filter_map(|m| m.value).collect();
    EvalSummary {
        metric: task_kind.metric_name().to_string(),
        task_mean: if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        },
        per_task,
    }
}

fn not_evaluable(e: &MetricError) -> String {
    format!("not evaluable: {e}")
}
