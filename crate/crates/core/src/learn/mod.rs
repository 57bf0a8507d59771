//! Training, evaluation and elastic weight consolidation.

pub mod adam;
pub mod checkpoint;
pub mod curve;
pub mod fisher;
pub mod loss;
pub mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::Checkpoint;
pub use curve::{CurveEntry, LearningCurve, Split};
pub use fisher::{fisher, fisher_diagonal, fisher_full, EwcAnchor, FisherInfo, FisherMode};
pub use loss::{bce_loss, ewc_penalty, loss_and_gradient, loss_gradient, total_loss};
pub use train::{continual_run, evaluate, init_params, train_task, ContinualOutcome, EwcSettings, Task, TrainConfig};
