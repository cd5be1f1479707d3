use serde::{Deserialize, Serialize};

use super::metrics::{class_weights, evaluate_predictions, EvalReport};
use super::optimizer::{Optimizer, OptimizerKind};
use crate::error::{Error, Result};
use crate::model::{batch_loss_and_grads, Model, ModelConfig, ModelParams};
use crate::nn::Rng;
use crate::text::{EncodedInstance, Label};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub dropout: f64,
    pub batch_size: usize,
    /// L2 coefficient λ of `(λ/2)‖θ‖²`.
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Weight the loss by `N / (K · N_c)`; otherwise all weights are 1.
    pub class_weighting: bool,
    /// Also score the training set after every epoch.
    pub eval_train: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dropout: 0.5,
            batch_size: 16,
            l2: 1e-4,
            epochs: 30,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            class_weighting: true,
            eval_train: false,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout must be in [0, 1), got {}", self.dropout)));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch_size and epochs must be positive".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config(format!("l2 must be non-negative, got {}", self.l2)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean mini-batch objective over the epoch.
    pub train_loss: f64,
    pub dev_macro_f1: Option<f64>,
    pub dev_f1_s: Option<f64>,
    pub train_accuracy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub best: ModelParams,
    /// 1-based epoch whose parameters are returned.
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
    pub class_weights: [f64; 2],
}

/// Index of the highest score, earliest on ties. `None` for no scores.
pub fn select_best_epoch(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if best.map_or(true, |b| *s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

pub fn predict_labels(config: &ModelConfig, params: &ModelParams, data: &[EncodedInstance]) -> Result<Vec<Label>> {
    let model = Model::new(config.clone(), params.clone());
    data.iter().map(|i| model.predict(i).map(|p| p.label)).collect()
}

pub fn evaluate_model(config: &ModelConfig, params: &ModelParams, data: &[EncodedInstance]) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation data"));
    }
    let pred = predict_labels(config, params, data)?;
    let gold: Vec<Label> = data.iter().map(|i| i.label).collect();
    evaluate_predictions(&gold, &pred)
}

/// Mini-batch training with seeded shuffling. After each epoch the dev set
/// is scored; the parameters of the epoch with the best dev macro-F1 are
/// returned (earliest on ties, last epoch when `dev` is empty).
pub fn train_model(
    config: &ModelConfig,
    init: ModelParams,
    train: &[EncodedInstance],
    dev: &[EncodedInstance],
    hyper: &Hyperparams,
) -> Result<TrainOutcome> {
    hyper.validate()?;
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Empty("training data"));
    }
    let labels: Vec<Label> = train.iter().map(|i| i.label).collect();
    let weights = if hyper.class_weighting { class_weights(&labels)? } else { [1.0, 1.0] };
    let frozen = if config.train_embeddings { vec![] } else { vec!["embeddings".to_string()] };
    let mut opt = Optimizer::new(hyper.optimizer, hyper.learning_rate, frozen)?;
    let mut shuffle_rng = Rng::derive(hyper.seed, 1);
    let mut dropout_rng = Rng::derive(hyper.seed, 2);
    let mut params = init;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(hyper.epochs);
    let mut best: Option<(f64, usize, ModelParams)> = None;

    for epoch in 1..=hyper.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut total = 0.0;
        let mut batches = 0usize;
        for (b, chunk) in order.chunks(hyper.batch_size).enumerate() {
            let batch: Vec<&EncodedInstance> = chunk.iter().map(|&i| &train[i]).collect();
            let (loss, grads) = match batch_loss_and_grads(
                config,
                &params,
                &batch,
                &weights,
                hyper.l2,
                Some((hyper.dropout, &mut dropout_rng)),
            ) {
                Err(Error::NonFinite(_)) => return Err(Error::Diverged { epoch, batch: b, loss: f64::NAN }),
                r => r?,
            };
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, batch: b, loss });
            }
            opt.step(&mut params, &grads)?;
            total += loss;
            batches += 1;
        }
        let dev_report = if dev.is_empty() { None } else { Some(evaluate_model(config, &params, dev)?) };
        let train_accuracy = if hyper.eval_train {
            Some(evaluate_model(config, &params, train)?.accuracy)
        } else {
            None
        };
        let record = EpochRecord {
            epoch,
            train_loss: total / batches as f64,
            dev_macro_f1: dev_report.as_ref().map(|r| r.macro_f1),
            dev_f1_s: dev_report.as_ref().map(|r| r.class(Label::Sarcastic).f1),
            train_accuracy,
        };
        log::info!(
            "epoch {epoch}: loss {:.6} dev macro-F1 {}",
            record.train_loss,
            record.dev_macro_f1.map_or("-".into(), |f| format!("{f:.4}"))
        );
        let score = record.dev_macro_f1.unwrap_or(f64::NEG_INFINITY);
        let improves = match &best {
            None => true,
            Some((s, _, _)) => score > *s || dev.is_empty(),
        };
        if improves {
            best = Some((score, epoch, params.clone()));
        }
        history.push(record);
    }
    let (_, best_epoch, best) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        best,
        best_epoch,
        history,
        class_weights: weights,
    })
}
