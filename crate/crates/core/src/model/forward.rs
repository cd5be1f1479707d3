use serde::{Deserialize, Serialize};

use super::attention::{attention_backward, attention_forward, AttnTrace};
use super::config::{Architecture, ModelConfig};
use super::lstm::{backward_sequence, run_sequence, LstmParams, LstmState, LstmTrace};
use super::params::{slot_names, EncoderParams, ModelParams, NUM_CLASSES};
use super::view::{encoded_turn, joint_view, turn_view, Segment, TurnView};
use crate::error::{Error, Result};
use crate::nn::{softmax, DropoutMask, ParamSet, Rng};
use crate::text::{EncodedInstance, Label, TurnRole};

/// Floor applied to the gold-class probability inside the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Turn(TurnRole),
    /// Several turns read by one encoder.
    Joint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// Over the sentences of the scope.
    Sentence,
    /// Over every word of the turn, laid out as the `max_sents × max_words`
    /// grid.
    Word,
    /// Over the words of one sentence (grid row).
    WordInSentence(usize),
}

/// One normalized weight block, padded to its full layout length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionBlock {
    pub scope: Scope,
    pub level: Level,
    pub weights: Vec<f64>,
    /// Positions that took part in the softmax.
    pub mask: Vec<bool>,
    /// Turn segments of a joint sentence block; empty otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub segments: Vec<SegmentInfo>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentInfo {
    pub role: Option<TurnRole>,
    pub start: usize,
    pub len: usize,
}

impl From<&Segment> for SegmentInfo {
    fn from(s: &Segment) -> Self {
        SegmentInfo {
            role: s.role,
            start: s.start,
            len: s.len,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AttentionRecord {
    pub blocks: Vec<AttentionBlock>,
}

impl AttentionRecord {
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Sentence weights and mask over the sentence slots of `role`. For a
    /// joint block this is the turn's slice of the joint distribution.
    pub fn sentence_block(&self, role: TurnRole) -> Option<(Vec<f64>, Vec<bool>)> {
        for b in self.blocks.iter().filter(|b| b.level == Level::Sentence) {
            match b.scope {
                Scope::Turn(r) if r == role => return Some((b.weights.clone(), b.mask.clone())),
                Scope::Joint => {
                    if let Some(seg) = b.segments.iter().find(|s| s.role == Some(role)) {
                        let r = seg.start..seg.start + seg.len;
                        return Some((b.weights[r.clone()].to_vec(), b.mask[r].to_vec()));
                    }
                }
                _ => {}
            }
        }
        None
    }

    pub fn sentence_weights(&self, role: TurnRole) -> Option<Vec<f64>> {
        self.sentence_block(role).map(|(w, _)| w)
    }

    /// Word weights of one grid row of `role`, from hierarchical blocks or
    /// sliced from a flat word block.
    pub fn word_weights(&self, role: TurnRole, row: usize, max_words: usize) -> Option<Vec<f64>> {
        for b in &self.blocks {
            if b.scope != Scope::Turn(role) {
                continue;
            }
            match b.level {
                Level::WordInSentence(r) if r == row => return Some(b.weights.clone()),
                Level::Word => return b.weights.get(row * max_words..(row + 1) * max_words).map(<[f64]>::to_vec),
                _ => {}
            }
        }
        None
    }
}

/// Forward values of one encoder slot.
#[derive(Clone, Debug)]
struct SlotTrace {
    view: TurnView,
    init: LstmState,
    word_x: Vec<Vec<f64>>,
    word_trace: Option<LstmTrace>,
    word_hs: Vec<Vec<f64>>,
    word_attn: Option<AttnTrace>,
    /// Word embeddings and attention per sentence (hierarchical model).
    sent_word_x: Vec<Vec<Vec<f64>>>,
    sent_word_attn: Vec<AttnTrace>,
    sent_x: Vec<Vec<f64>>,
    sent_trace: Option<LstmTrace>,
    sent_hs: Vec<Vec<f64>>,
    sent_attn: Option<AttnTrace>,
    output: Vec<f64>,
    final_state: LstmState,
}

impl SlotTrace {
    fn new(view: TurnView, init: LstmState) -> Self {
        SlotTrace {
            view,
            final_state: init.clone(),
            init,
            word_x: Vec::new(),
            word_trace: None,
            word_hs: Vec::new(),
            word_attn: None,
            sent_word_x: Vec::new(),
            sent_word_attn: Vec::new(),
            sent_x: Vec::new(),
            sent_trace: None,
            sent_hs: Vec::new(),
            sent_attn: None,
            output: Vec::new(),
        }
    }
}

/// Everything the backward pass needs from one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    slots: Vec<SlotTrace>,
    z: Vec<f64>,
    dropout: DropoutMask,
    zd: Vec<f64>,
    pub probs: Vec<f64>,
    pub record: AttentionRecord,
}

impl ForwardPass {
    /// Initial cell state of each encoder, in chain order (exposed for the
    /// conditional-encoding contract).
    pub fn initial_cells(&self) -> Vec<Vec<f64>> {
        self.slots.iter().map(|s| s.init.c.clone()).collect()
    }

    /// Final cell state of each encoder, in chain order.
    pub fn final_cells(&self) -> Vec<Vec<f64>> {
        self.slots.iter().map(|s| s.final_state.c.clone()).collect()
    }

    /// The pre-dropout classifier input.
    pub fn features(&self) -> &[f64] {
        &self.z
    }

    pub fn predicted(&self) -> Label {
        argmax_label(&self.probs)
    }
}

/// S on ties, matching index order.
pub fn argmax_label(probs: &[f64]) -> Label {
    if probs.get(1).copied().unwrap_or(0.0) > probs[0] {
        Label::NotSarcastic
    } else {
        Label::Sarcastic
    }
}

fn embed(params: &ModelParams, id: u32) -> Vec<f64> {
    params.embeddings.row(id as usize).to_vec()
}

fn lstm_of<'a>(p: &'a Option<LstmParams>, what: &str) -> Result<&'a LstmParams> {
    p.as_ref().ok_or_else(|| Error::Checkpoint(format!("encoder lacks {what}")))
}

fn attn_of<'a, T>(p: &'a Option<T>, what: &str) -> Result<&'a T> {
    p.as_ref().ok_or_else(|| Error::Checkpoint(format!("encoder lacks {what}")))
}

fn encode_slot(
    arch: Architecture,
    enc: &EncoderParams,
    params: &ModelParams,
    view: TurnView,
    init: LstmState,
) -> Result<SlotTrace> {
    let mut t = SlotTrace::new(view, init);
    if arch.has_attention() && t.view.sents.is_empty() {
        // Nothing to attend over: the turn contributes a zero vector.
        t.output = vec![0.0; t.init.h.len()];
        return Ok(t);
    }
    match arch {
        Architecture::Ct | Architecture::CtConcatContext | Architecture::MultiLstm | Architecture::Conditional => {
            let lstm = lstm_of(&enc.word_lstm, "word_lstm")?;
            t.word_x = t.view.tokens().map(|id| embed(params, id)).collect();
            let trace = run_sequence(lstm, &t.word_x, &vec![true; t.word_x.len()], &t.init)?;
            t.final_state = trace.states.last().cloned().unwrap_or_else(|| t.init.clone());
            t.output = t.final_state.h.clone();
            t.word_trace = Some(trace);
        }
        Architecture::AttnWord => {
            let lstm = lstm_of(&enc.word_lstm, "word_lstm")?;
            let attn = attn_of(&enc.word_attn, "word_attn")?;
            t.word_x = t.view.tokens().map(|id| embed(params, id)).collect();
            let trace = run_sequence(lstm, &t.word_x, &vec![true; t.word_x.len()], &t.init)?;
            t.word_hs = trace.states.iter().map(|s| s.h.clone()).collect();
            let (v, at) = attention_forward(attn, &t.word_hs, &vec![true; t.word_hs.len()])?;
            t.final_state = trace.states.last().cloned().unwrap_or_else(|| t.init.clone());
            t.output = v;
            t.word_trace = Some(trace);
            t.word_attn = Some(at);
        }
        Architecture::AttnSent | Architecture::AttnWordSent => {
            let lstm = lstm_of(&enc.sent_lstm, "sent_lstm")?;
            let attn = attn_of(&enc.sent_attn, "sent_attn")?;
            for s in &t.view.sents {
                let xs: Vec<Vec<f64>> = s.ids.iter().map(|&id| embed(params, id)).collect();
                let rep = if arch == Architecture::AttnSent {
                    sentence_average(&xs)?
                } else {
                    let wa = attn_of(&enc.word_attn, "word_attn")?;
                    let (v, at) = attention_forward(wa, &xs, &vec![true; xs.len()])?;
                    t.sent_word_attn.push(at);
                    v
                };
                t.sent_word_x.push(xs);
                t.sent_x.push(rep);
            }
            let trace = run_sequence(lstm, &t.sent_x, &vec![true; t.sent_x.len()], &t.init)?;
            t.sent_hs = trace.states.iter().map(|s| s.h.clone()).collect();
            let (v, at) = attention_forward(attn, &t.sent_hs, &vec![true; t.sent_hs.len()])?;
            t.final_state = trace.states.last().cloned().unwrap_or_else(|| t.init.clone());
            t.output = v;
            t.sent_trace = Some(trace);
            t.sent_attn = Some(at);
        }
    }
    Ok(t)
}

/// Masked mean of word embeddings.
pub fn sentence_average(xs: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = xs.first().ok_or(Error::Empty("sentence with no unmasked tokens"))?;
    let mut out = vec![0.0; first.len()];
    for x in xs {
        for (o, v) in out.iter_mut().zip(x) {
            *o += v;
        }
    }
    let n = xs.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

fn record_slot(arch: Architecture, scope: Scope, t: &SlotTrace, record: &mut AttentionRecord) {
    let v = &t.view;
    if let Some(at) = &t.word_attn {
        // Flat word attention: positions in the turn's word grid.
        let len = v.max_sents * v.max_words;
        let mut weights = vec![0.0; len];
        let mut mask = vec![false; len];
        let mut k = 0;
        for s in &v.sents {
            let row = s.row.unwrap_or(0);
            for &w in &s.word_pos {
                weights[row * v.max_words + w] = at.alpha[k];
                mask[row * v.max_words + w] = true;
                k += 1;
            }
        }
        record.blocks.push(AttentionBlock {
            scope,
            level: Level::Word,
            weights,
            mask,
            segments: Vec::new(),
        });
    }
    if arch == Architecture::AttnWordSent {
        for (s, at) in v.sents.iter().zip(&t.sent_word_attn) {
            let Some(row) = s.row else { continue };
            let mut weights = vec![0.0; v.max_words];
            let mut mask = vec![false; v.max_words];
            for (k, &w) in s.word_pos.iter().enumerate() {
                weights[w] = at.alpha[k];
                mask[w] = true;
            }
            record.blocks.push(AttentionBlock {
                scope,
                level: Level::WordInSentence(row),
                weights,
                mask,
                segments: Vec::new(),
            });
        }
    }
    if let Some(at) = &t.sent_attn {
        let mut weights = vec![0.0; v.block_len];
        let mut mask = vec![false; v.block_len];
        for (k, s) in v.sents.iter().enumerate() {
            weights[s.sent_pos] = at.alpha[k];
            mask[s.sent_pos] = true;
        }
        record.blocks.push(AttentionBlock {
            scope,
            level: Level::Sentence,
            weights,
            mask,
            segments: if scope == Scope::Joint {
                v.segments.iter().map(SegmentInfo::from).collect()
            } else {
                Vec::new()
            },
        });
    }
}

/// Forward pass. With `dropout = Some((rate, rng))` an inverted-dropout
/// mask is applied to the concatenated classifier input.
pub fn model_forward(
    config: &ModelConfig,
    params: &ModelParams,
    inst: &EncodedInstance,
    dropout: Option<(f64, &mut Rng)>,
) -> Result<ForwardPass> {
    let arch = config.architecture;
    let hidden = config.hidden_dim;
    let views: Vec<(TurnRole, TurnView)> = config
        .roles()
        .into_iter()
        .map(|role| {
            let enc = encoded_turn(inst, role)?;
            Ok((role, turn_view(enc, role, role == TurnRole::Prior && config.last_pt_only)))
        })
        .collect::<Result<_>>()?;
    if views.iter().any(|(r, v)| *r == TurnRole::Current && v.sents.is_empty()) {
        return Err(Error::Data(format!("instance {} has an empty current turn", inst.id)));
    }
    let names = slot_names(config);
    let slot_views: Vec<(Scope, TurnView)> = if config.is_joint() {
        vec![(Scope::Joint, joint_view(views))]
    } else {
        views.into_iter().map(|(r, v)| (Scope::Turn(r), v)).collect()
    };

    let mut slots = Vec::with_capacity(slot_views.len());
    let mut record = AttentionRecord::default();
    let mut carry: Option<Vec<f64>> = None;
    for ((scope, view), name) in slot_views.into_iter().zip(&names) {
        let enc = params
            .encoder(name)
            .ok_or_else(|| Error::Checkpoint(format!("missing encoder '{name}'")))?;
        let mut init = LstmState::zeros(hidden);
        if arch == Architecture::Conditional {
            if let Some(c) = carry.take() {
                init.c = c;
            }
        }
        let t = encode_slot(arch, enc, params, view, init)?;
        if arch == Architecture::Conditional {
            carry = Some(t.final_state.c.clone());
        }
        record_slot(arch, scope, &t, &mut record);
        slots.push(t);
    }

    let z: Vec<f64> = if arch == Architecture::Conditional {
        slots.last().map(|s| s.output.clone()).unwrap_or_default()
    } else {
        slots.iter().flat_map(|s| s.output.iter().copied()).collect()
    };
    let dropout = match dropout {
        Some((rate, rng)) if rate > 0.0 => DropoutMask::sample(rate, z.len(), rng)?,
        _ => DropoutMask::identity(z.len()),
    };
    let zd = dropout.apply(&z)?;
    let mut logits = params.out_w.matvec(&zd)?;
    for (l, b) in logits.iter_mut().zip(params.out_b.as_slice()) {
        *l += b;
    }
    let probs = softmax(&logits)?;
    Ok(ForwardPass {
        slots,
        z,
        dropout,
        zd,
        probs,
        record,
    })
}

fn add_to_embedding(grads: &mut ModelParams, id: u32, dx: &[f64], scale: f64, train_embeddings: bool) {
    if !train_embeddings {
        return;
    }
    for (g, d) in grads.embeddings.row_mut(id as usize).iter_mut().zip(dx) {
        *g += scale * d;
    }
}

/// Backward pass of one slot; returns the gradient w.r.t. its initial cell.
fn backward_slot(
    config: &ModelConfig,
    enc: &EncoderParams,
    genc: &mut EncoderParams,
    grads_emb: &mut ModelParams,
    t: &SlotTrace,
    d_out: &[f64],
    dc_final: &[f64],
) -> Vec<f64> {
    let h = config.hidden_dim;
    let zeros = vec![0.0; h];
    let train_emb = config.train_embeddings;
    match config.architecture {
        Architecture::Ct | Architecture::CtConcatContext | Architecture::MultiLstm | Architecture::Conditional => {
            let lstm = enc.word_lstm.as_ref().expect("word_lstm");
            let trace = t.word_trace.as_ref().expect("word trace");
            if trace.states.is_empty() {
                return dc_final.to_vec();
            }
            let (dxs, _, dc0) =
                backward_sequence(lstm, trace, &[], d_out, dc_final, genc.word_lstm.as_mut().expect("grad"));
            for (id, dx) in t.view.tokens().zip(&dxs) {
                add_to_embedding(grads_emb, id, dx, 1.0, train_emb);
            }
            dc0
        }
        _ if t.word_attn.is_none() && t.sent_attn.is_none() && config.architecture.has_attention() => {
            dc_final.to_vec()
        }
        Architecture::AttnWord => {
            let lstm = enc.word_lstm.as_ref().expect("word_lstm");
            let attn = enc.word_attn.as_ref().expect("word_attn");
            let trace = t.word_trace.as_ref().expect("word trace");
            let at = t.word_attn.as_ref().expect("word attention");
            let dhs = attention_backward(attn, &t.word_hs, at, d_out, genc.word_attn.as_mut().expect("grad"));
            let (dxs, _, dc0) =
                backward_sequence(lstm, trace, &dhs, &zeros, dc_final, genc.word_lstm.as_mut().expect("grad"));
            for (id, dx) in t.view.tokens().zip(&dxs) {
                add_to_embedding(grads_emb, id, dx, 1.0, train_emb);
            }
            dc0
        }
        Architecture::AttnSent | Architecture::AttnWordSent => {
            let lstm = enc.sent_lstm.as_ref().expect("sent_lstm");
            let attn = enc.sent_attn.as_ref().expect("sent_attn");
            let trace = t.sent_trace.as_ref().expect("sentence trace");
            let at = t.sent_attn.as_ref().expect("sentence attention");
            let dhs = attention_backward(attn, &t.sent_hs, at, d_out, genc.sent_attn.as_mut().expect("grad"));
            let (dxs, _, dc0) =
                backward_sequence(lstm, trace, &dhs, &zeros, dc_final, genc.sent_lstm.as_mut().expect("grad"));
            for (k, (s, dx)) in t.view.sents.iter().zip(&dxs).enumerate() {
                if config.architecture == Architecture::AttnSent {
                    let scale = 1.0 / s.ids.len() as f64;
                    for &id in &s.ids {
                        add_to_embedding(grads_emb, id, dx, scale, train_emb);
                    }
                } else {
                    let wa = enc.word_attn.as_ref().expect("word_attn");
                    let dws = attention_backward(
                        wa,
                        &t.sent_word_x[k],
                        &t.sent_word_attn[k],
                        dx,
                        genc.word_attn.as_mut().expect("grad"),
                    );
                    for (&id, dw) in s.ids.iter().zip(&dws) {
                        add_to_embedding(grads_emb, id, dw, 1.0, train_emb);
                    }
                }
            }
            dc0
        }
    }
}

/// Accumulates into `grads` the gradient of a loss whose derivative with
/// respect to the logits is `dlogits`.
pub fn model_backward(
    config: &ModelConfig,
    params: &ModelParams,
    pass: &ForwardPass,
    dlogits: &[f64],
    grads: &mut ModelParams,
) -> Result<()> {
    if dlogits.len() != NUM_CLASSES {
        return Err(Error::dim("model_backward", NUM_CLASSES, dlogits.len()));
    }
    grads.out_w.add_outer(dlogits, &pass.zd)?;
    for (g, d) in grads.out_b.as_mut_slice().iter_mut().zip(dlogits) {
        *g += d;
    }
    let mut dzd = vec![0.0; pass.zd.len()];
    params.out_w.matvec_t_acc(dlogits, &mut dzd)?;
    let dz = pass.dropout.backward(&dzd)?;

    let h = config.hidden_dim;
    let names = slot_names(config);
    // Detach encoder gradients so embeddings and encoders can be borrowed
    // separately.
    let mut genc: Vec<(String, EncoderParams)> = std::mem::take(&mut grads.encoders);
    let result = (|| {
        if config.architecture == Architecture::Conditional {
            let mut dc = vec![0.0; h];
            let last = pass.slots.len() - 1;
            for k in (0..pass.slots.len()).rev() {
                let d_out = if k == last { dz.clone() } else { vec![0.0; h] };
                let enc = params.encoder(&names[k]).expect("encoder");
                let g = &mut genc[k].1;
                dc = backward_slot(config, enc, g, grads, &pass.slots[k], &d_out, &dc);
            }
        } else {
            for (k, t) in pass.slots.iter().enumerate() {
                let d_out = &dz[k * h..(k + 1) * h];
                let enc = params.encoder(&names[k]).expect("encoder");
                let g = &mut genc[k].1;
                backward_slot(config, enc, g, grads, t, d_out, &vec![0.0; h]);
            }
        }
        Ok(())
    })();
    grads.encoders = genc;
    result
}

/// `-w · ln max(p_gold, 1e-12)` and its gradient w.r.t. the logits.
pub fn weighted_nll(probs: &[f64], label: Label, weight: f64) -> (f64, Vec<f64>) {
    let k = label.index();
    let p = probs[k];
    if p < PROB_FLOOR {
        log::warn!("gold-class probability {p:e} clamped to {PROB_FLOOR:e}");
    }
    let loss = -weight * p.max(PROB_FLOOR).ln();
    let d = probs
        .iter()
        .enumerate()
        .map(|(i, &pi)| weight * (pi - if i == k { 1.0 } else { 0.0 }))
        .collect();
    (loss, d)
}

/// Adds `λ θ` to `grads` for every regularized block.
pub(crate) fn add_l2_grad(config: &ModelConfig, params: &ModelParams, grads: &mut ModelParams, lambda: f64) {
    if lambda == 0.0 {
        return;
    }
    let theirs = params.blocks();
    for ((name, g), (_, p)) in grads.blocks_mut().into_iter().zip(theirs) {
        if name == "embeddings" && !config.train_embeddings {
            continue;
        }
        g.add_scaled(p, lambda).expect("same shapes");
    }
}

/// Class-weighted NLL plus `(λ/2)‖θ‖²` of one instance, with gradients.
pub fn loss_and_grads(
    config: &ModelConfig,
    params: &ModelParams,
    inst: &EncodedInstance,
    class_weight: f64,
    lambda: f64,
    dropout: Option<(f64, &mut Rng)>,
) -> Result<(f64, ModelParams)> {
    let pass = model_forward(config, params, inst, dropout)?;
    let (nll, dlogits) = weighted_nll(&pass.probs, inst.label, class_weight);
    let mut grads = params.zeros_like();
    model_backward(config, params, &pass, &dlogits, &mut grads)?;
    add_l2_grad(config, params, &mut grads, lambda);
    let loss = nll + 0.5 * lambda * params.l2_norm_sq(config.train_embeddings);
    Ok((loss, grads))
}
