//! Minibatch training with Adam, a validation-driven early stop, and
//! best-weights restoration. One seeded random stream drives both the
//! initialization and every epoch's shuffle, so a run is a pure function
//! of (shape, data, config).

use super::adam::{Adam, AdamConfig};
use super::backward::{batch_loss_refs, gradient_refs, GradientError};
use super::forward::forward_trace;
use super::shape::{FusionModel, ModelShape, OutputHead, ShapeError};
use crate::metrics::{rmse, roc_auc, MetricError};
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// What the labels mean, which decides the validation metric:
/// ROC-AUC (higher is better) or RMSE (lower is better).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification,
    Regression,
}

impl TaskKind {
    pub fn for_head(head: OutputHead) -> TaskKind {
        if head.is_classification() {
            TaskKind::Classification
        } else {
            TaskKind::Regression
        }
    }

    pub fn higher_is_better(self) -> bool {
        matches!(self, TaskKind::Classification)
    }

    pub fn metric_name(self) -> &'static str {
        match self {
            TaskKind::Classification => "roc_auc",
            TaskKind::Regression => "rmse",
        }
    }
}

/// One molecule, featurized: its view vectors in view order and its labels
/// (one per task; `None` marks a missing label).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct FeaturizedExample {
    pub views: Vec<Vec<f64>>,
    pub labels: Vec<Option<f64>>,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Multiplier on the Xavier initialization limit.
    pub init_scale: f64,
    pub adam: AdamConfig,
    /// Stop after this many consecutive epochs without a validation
    /// improvement; `None` disables early stopping.
    pub patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            epochs: 50,
            batch_size: 32,
            seed: 0,
            init_scale: 1.0,
            adam: AdamConfig::default(),
            patience: Some(10),
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Loss over the full training set after the epoch's updates.
    pub train_loss: f64,
    /// Validation metric, absent when no validation examples were given.
    pub valid_metric: Option<f64>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct TrainOutcome {
    /// The model at its best validation epoch (final weights when no
    /// validation set was given).
    pub model: FusionModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_metric: Option<f64>,
    pub stopped_early: bool,
    pub task: TaskKind,
}

#[derive(Clone, PartialEq, Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Gradient(#[from] GradientError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("no training examples")]
    EmptyTrainingSet,
    #[error("batch size must be at least 1")]
    ZeroBatchSize,
    #[error("training loss became non-finite at epoch {epoch}")]
    DivergedLoss { epoch: usize },
}

/// Validation metric for the current weights: mean per-task ROC-AUC for
/// sigmoid heads (tasks whose validation slice is single-class are
/// skipped), RMSE over every labeled output for the linear head.
pub fn validation_metric(
    model: &FusionModel,
    examples: &[FeaturizedExample],
    task: TaskKind,
) -> Result<f64, TrainError> {
    let mut outputs = Vec::with_capacity(examples.len());
    for ex in examples {
        let trace = forward_trace(model, &ex.views).map_err(GradientError::from)?;
        outputs.push(trace.y_hat);
    }
    match task {
        TaskKind::Classification => {
            let width = model.shape.head.output_width();
            let mut aucs = Vec::new();
            let mut last_err = MetricError::EmptyBatch;
            for t in 0..width {
                let mut scores = Vec::new();
                let mut labels = Vec::new();
                for (out, ex) in outputs.iter().zip(examples) {
                    if let Some(y) = ex.labels.get(t).copied().flatten() {
                        scores.push(out[t]);
                        labels.push(y > 0.5);
                    }
                }
                match roc_auc(&scores, &labels) {
                    Ok(auc) => aucs.push(auc),
                    Err(e) => last_err = e,
                }
            }
            if aucs.is_empty() {
                return Err(TrainError::Metric(last_err));
            }
            Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
        }
        TaskKind::Regression => {
            let mut preds = Vec::new();
            let mut targets = Vec::new();
            for (out, ex) in outputs.iter().zip(examples) {
                for (p, label) in out.iter().zip(&ex.labels) {
                    if let Some(y) = *label {
                        preds.push(*p);
                        targets.push(y);
                    }
                }
            }
            Ok(rmse(&preds, &targets)?)
        }
    }
}

fn improves(task: TaskKind, candidate: f64, best: Option<f64>) -> bool {
    match best {
        None => true,
        Some(b) => {
            if task.higher_is_better() {
                candidate > b
            } else {
                candidate < b
            }
        }
    }
}

/// Train a fresh model of the given shape. The validation set may be
/// empty, which disables early stopping and best-weights restoration.
pub fn train(
    shape: ModelShape,
    train_set: &[FeaturizedExample],
    valid_set: &[FeaturizedExample],
    config: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    shape.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    if config.batch_size == 0 {
        return Err(TrainError::ZeroBatchSize);
    }

    let task = TaskKind::for_head(shape.head);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = FusionModel::init_with(shape, config.init_scale, &mut rng);
    let mut adam = Adam::new(config.adam, model.param_len());

    let mut history = Vec::with_capacity(config.epochs);
    let mut best_params: Option<Vec<f64>> = None;
    let mut best_metric: Option<f64> = None;
    let mut best_epoch: Option<usize> = None;
    let mut since_best = 0usize;
    let mut stopped_early = false;

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&FeaturizedExample> = chunk.iter().map(|&i| &train_set[i]).collect();
            let (_, grad) = gradient_refs(&model, &batch)?;
            adam.step(&mut model.params, &grad);
        }

        let all: Vec<&FeaturizedExample> = train_set.iter().collect();
        let train_loss = batch_loss_refs(&model, &all)?;
        if !train_loss.is_finite() {
            return Err(TrainError::DivergedLoss { epoch });
        }

        let valid_metric = if valid_set.is_empty() {
            None
        } else {
            Some(validation_metric(&model, valid_set, task)?)
        };
        history.push(EpochRecord {
            epoch,
            train_loss,
            valid_metric,
        });

        if let Some(metric) = valid_metric {
            if improves(task, metric, best_metric) {
                best_metric = Some(metric);
                best_epoch = Some(epoch);
                best_params = Some(model.params.clone());
                since_best = 0;
            } else {
                since_best += 1;
                if let Some(patience) = config.patience {
                    if since_best >= patience {
                        stopped_early = true;
                        break;
                    }
                }
            }
        }
    }

    if let Some(params) = best_params {
        model.params = params;
    }
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
        best_metric,
        stopped_early,
        task,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::views::ViewKind;

    /// Linearly separable toy set: label is 1 when the first feature is
    /// positive. The second view is uninformative noise.
    fn toy_classification(n: usize) -> Vec<FeaturizedExample> {
        (0..n)
            .map(|i| {
                let x = if i % 2 == 0 { 1.0 } else { -1.0 };
                let jitter = ((i * 13 + 5) % 17) as f64 / 17.0 - 0.5;
                FeaturizedExample {
                    views: alloc::vec![
                        alloc::vec![x + 0.1 * jitter, jitter],
                        alloc::vec![jitter, -jitter, 0.3],
                    ],
                    labels: alloc::vec![Some(if x > 0.0 { 1.0 } else { 0.0 })],
                }
            })
            .collect()
    }

    fn toy_shape() -> ModelShape {
        ModelShape {
            views: alloc::vec![(ViewKind::Structure, 2), (ViewKind::Rule, 3)],
            hidden_dim: 4,
            mlp_hidden: alloc::vec![4],
            head: OutputHead::SigmoidScalar,
        }
    }

    #[test]
    fn learns_a_separable_problem() {
        let data = toy_classification(64);
        let (train_data, valid_data) = data.split_at(48);
        let outcome = train(
            toy_shape(),
            train_data,
            valid_data,
            &TrainConfig {
                epochs: 60,
                batch_size: 16,
                seed: 1,
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.task, TaskKind::Classification);
        let best = outcome.best_metric.unwrap();
        assert!(best > 0.95, "validation AUC only reached {best}");
        let first = outcome.history.first().unwrap().train_loss;
        let last = outcome.history.last().unwrap().train_loss;
        assert!(last < first, "loss did not decrease: {first} -> {last}");
    }

    #[test]
    fn training_is_deterministic() {
        let data = toy_classification(32);
        let (tr, va) = data.split_at(24);
        let config = TrainConfig {
            epochs: 5,
            batch_size: 8,
            seed: 42,
            ..TrainConfig::default()
        };
        let a = train(toy_shape(), tr, va, &config).unwrap();
        let b = train(toy_shape(), tr, va, &config).unwrap();
        assert_eq!(a.model.params, b.model.params);
        assert_eq!(a.history, b.history);

        let c = train(toy_shape(), tr, va, &TrainConfig { seed: 43, ..config }).unwrap();
        assert_ne!(a.model.params, c.model.params);
    }

    #[test]
    fn zero_learning_rate_keeps_initial_weights() {
        let data = toy_classification(16);
        let config = TrainConfig {
            epochs: 3,
            batch_size: 4,
            seed: 7,
            adam: AdamConfig {
                learning_rate: 0.0,
                ..AdamConfig::default()
            },
            ..TrainConfig::default()
        };
        let outcome = train(toy_shape(), &data, &[], &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fresh = FusionModel::init_with(toy_shape(), 1.0, &mut rng);
        assert_eq!(outcome.model.params, fresh.params);
        assert!(outcome.best_epoch.is_none());
        assert!(!outcome.stopped_early);
    }

    #[test]
    fn early_stopping_restores_the_best_weights() {
        let data = toy_classification(40);
        let (tr, va) = data.split_at(30);
        let outcome = train(
            toy_shape(),
            tr,
            va,
            &TrainConfig {
                epochs: 200,
                batch_size: 8,
                seed: 3,
                patience: Some(4),
                ..TrainConfig::default()
            },
        )
        .unwrap();
        if outcome.stopped_early {
            let best = outcome.best_epoch.unwrap();
            assert!(outcome.history.len() > best + 4 - 1);
            assert!(outcome.history.len() < 200);
        }
        // Restored weights must reproduce the recorded best metric.
        let again = validation_metric(&outcome.model, va, TaskKind::Classification).unwrap();
        assert!((again - outcome.best_metric.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn regression_trains_and_reports_rmse() {
        let data: Vec<FeaturizedExample> = (0..32)
            .map(|i| {
                let x = i as f64 / 16.0 - 1.0;
                FeaturizedExample {
                    views: alloc::vec![alloc::vec![x, 0.5 * x]],
                    labels: alloc::vec![Some(2.0 * x + 0.25)],
                }
            })
            .collect();
        let shape = ModelShape {
            views: alloc::vec![(ViewKind::Task, 2)],
            hidden_dim: 3,
            mlp_hidden: alloc::vec![],
            head: OutputHead::LinearScalar,
        };
        let (tr, va) = data.split_at(24);
        let outcome = train(
            shape,
            tr,
            va,
            &TrainConfig {
                epochs: 300,
                batch_size: 8,
                seed: 2,
                patience: None,
                adam: AdamConfig {
                    learning_rate: 0.01,
                    ..AdamConfig::default()
                },
                ..TrainConfig::default()
            },
        )
        .unwrap();
        assert_eq!(outcome.task, TaskKind::Regression);
        assert!(
            outcome.best_metric.unwrap() < 0.1,
            "rmse stayed at {}",
            outcome.best_metric.unwrap()
        );
    }

    #[test]
    fn input_guards() {
        assert_eq!(
            train(toy_shape(), &[], &[], &TrainConfig::default()),
            Err(TrainError::EmptyTrainingSet)
        );
        let data = toy_classification(4);
        assert_eq!(
            train(
                toy_shape(),
                &data,
                &[],
                &TrainConfig {
                    batch_size: 0,
                    ..TrainConfig::default()
                }
            ),
            Err(TrainError::ZeroBatchSize)
        );
    }
}
