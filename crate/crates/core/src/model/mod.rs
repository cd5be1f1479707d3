//! LSTM and attention encoders, every architecture variant, and the
//! two-class softmax readout with hand-derived gradients.

mod attention;
mod checkpoint;
mod config;
mod forward;
mod lstm;
mod params;
mod view;

pub use attention::{attention_backward, attention_forward, attention_pool, AttentionParams, AttnTrace};
pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use config::{Architecture, AttentionLayout, ContextUse, ModelConfig};
pub use forward::{
    argmax_label, loss_and_grads, model_backward, model_forward, sentence_average, weighted_nll, AttentionBlock,
    AttentionRecord, ForwardPass, Level, Scope, SegmentInfo, PROB_FLOOR,
};
pub use lstm::{backward_sequence, encode_sequence, lstm_step, run_sequence, LstmParams, LstmState, LstmTrace, StepCache};
pub use params::{EncoderParams, ModelParams, NUM_CLASSES};

use crate::error::Result;
use crate::nn::Rng;
use crate::text::{EncodedInstance, Label};

/// Mean weighted NLL over `batch` plus `(λ/2)‖θ‖²`, with gradients.
/// `weights[k]` is the class weight of label index `k`.
pub fn batch_loss_and_grads(
    config: &ModelConfig,
    params: &ModelParams,
    batch: &[&EncodedInstance],
    weights: &[f64; 2],
    lambda: f64,
    mut dropout: Option<(f64, &mut Rng)>,
) -> Result<(f64, ModelParams)> {
    let mut grads = params.zeros_like();
    let mut total = 0.0;
    let n = batch.len().max(1) as f64;
    for inst in batch {
        let d = dropout.as_mut().map(|(rate, rng)| (*rate, &mut **rng));
        let pass = model_forward(config, params, inst, d)?;
        let (nll, mut dlogits) = weighted_nll(&pass.probs, inst.label, weights[inst.label.index()]);
        total += nll;
        dlogits.iter_mut().for_each(|x| *x /= n);
        model_backward(config, params, &pass, &dlogits, &mut grads)?;
    }
    forward::add_l2_grad(config, params, &mut grads, lambda);
    let loss = total / n + 0.5 * lambda * params.l2_norm_sq(config.train_embeddings);
    Ok((loss, grads))
}

/// A configured model with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ModelParams,
}

/// Class probabilities (S, NS order), the argmax label and attention.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub probs: [f64; 2],
    pub label: Label,
    pub attention: AttentionRecord,
}

impl Model {
    pub fn new(config: ModelConfig, params: ModelParams) -> Self {
        Model { config, params }
    }

    /// Inference-mode forward pass.
    pub fn predict(&self, inst: &EncodedInstance) -> Result<Prediction> {
        let pass = model_forward(&self.config, &self.params, inst, None)?;
        Ok(Prediction {
            probs: [pass.probs[0], pass.probs[1]],
            label: pass.predicted(),
            attention: pass.record,
        })
    }

    pub fn predict_all(&self, data: &[EncodedInstance]) -> Result<Vec<Prediction>> {
        data.iter().map(|i| self.predict(i)).collect()
    }
}
