//! Training loop, model selection, evaluation metrics and significance
//! testing.

mod metrics;
mod optimizer;
mod split;
mod trainer;

pub use metrics::{class_weights, evaluate_predictions, f1, paired_bootstrap, ClassScores, EvalReport};
pub use split::{stratified_split, SplitSpec, Splits};
pub use optimizer::{Optimizer, OptimizerKind, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use trainer::{evaluate_model, predict_labels, select_best_epoch, train_model, EpochRecord, Hyperparams, TrainOutcome};
