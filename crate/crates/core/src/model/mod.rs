//! Fusion model: per-view projections, a learned softmax gate over views,
//! an MLP trunk, task heads, manual reverse-mode gradients, and Adam
//! training with early stopping.

mod adam;
mod backward;
mod contrib;
mod forward;
mod loss;
mod shape;
mod train;

pub use adam::{Adam, AdamConfig};
pub use backward::{batch_loss, gradient, GradientError};
pub use contrib::{component_contributions, ContributionReport};
pub use forward::{predict, ForwardError, ForwardTrace, Prediction};
pub use loss::{loss_classification, loss_regression, LossError, CLASSIFICATION_CLAMP};
pub use shape::{FusionModel, InitConfig, Layout, ModelShape, OutputHead, Segment, ShapeError};
pub use train::{
    train, validation_metric, EpochRecord, FeaturizedExample, TaskKind, TrainConfig, TrainError,
    TrainOutcome,
};
