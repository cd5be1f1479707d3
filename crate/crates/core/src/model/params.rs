use super::attention::AttentionParams;
use super::config::{Architecture, ModelConfig};
use super::lstm::LstmParams;
use crate::error::{Error, Result};
use crate::nn::{Matrix, ParamSet, Rng};
use crate::text::EmbeddingTable;

/// Number of output classes (S, NS).
pub const NUM_CLASSES: usize = 2;

/// The sub-networks one turn encoder owns; which are present depends on
/// the architecture.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams {
    pub word_lstm: Option<LstmParams>,
    pub word_attn: Option<AttentionParams>,
    pub sent_lstm: Option<LstmParams>,
    pub sent_attn: Option<AttentionParams>,
}

impl EncoderParams {
    fn blocks<'a>(&'a self, prefix: &str, out: &mut Vec<(String, &'a Matrix)>) {
        if let Some(p) = &self.word_lstm {
            out.extend(p.blocks().into_iter().map(|(n, m)| (format!("{prefix}.word_lstm.{n}"), m)));
        }
        if let Some(p) = &self.word_attn {
            out.extend(p.blocks().into_iter().map(|(n, m)| (format!("{prefix}.word_attn.{n}"), m)));
        }
        if let Some(p) = &self.sent_lstm {
            out.extend(p.blocks().into_iter().map(|(n, m)| (format!("{prefix}.sent_lstm.{n}"), m)));
        }
        if let Some(p) = &self.sent_attn {
            out.extend(p.blocks().into_iter().map(|(n, m)| (format!("{prefix}.sent_attn.{n}"), m)));
        }
    }

    fn blocks_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Matrix)>) {
        if let Some(p) = &mut self.word_lstm {
            out.extend(p.blocks_mut().into_iter().map(|(n, m)| (format!("{prefix}.word_lstm.{n}"), m)));
        }
        if let Some(p) = &mut self.word_attn {
            out.extend(p.blocks_mut().into_iter().map(|(n, m)| (format!("{prefix}.word_attn.{n}"), m)));
        }
        if let Some(p) = &mut self.sent_lstm {
            out.extend(p.blocks_mut().into_iter().map(|(n, m)| (format!("{prefix}.sent_lstm.{n}"), m)));
        }
        if let Some(p) = &mut self.sent_attn {
            out.extend(p.blocks_mut().into_iter().map(|(n, m)| (format!("{prefix}.sent_attn.{n}"), m)));
        }
    }
}

/// All trainable parameters of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// `vocab × embedding_dim`.
    pub embeddings: Matrix,
    /// Encoders keyed by slot name (`pt`, `ct`, `st` or `joint`).
    pub encoders: Vec<(String, EncoderParams)>,
    /// `2 × feature_dim`.
    pub out_w: Matrix,
    pub out_b: Matrix,
}

impl ParamSet for ModelParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![("embeddings".to_string(), &self.embeddings)];
        for (slot, enc) in &self.encoders {
            enc.blocks(slot, &mut out);
        }
        out.push(("classifier.w".into(), &self.out_w));
        out.push(("classifier.b".into(), &self.out_b));
        out
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut out = vec![("embeddings".to_string(), &mut self.embeddings)];
        for (slot, enc) in &mut self.encoders {
            enc.blocks_mut(slot, &mut out);
        }
        out.push(("classifier.w".into(), &mut self.out_w));
        out.push(("classifier.b".into(), &mut self.out_b));
        out
    }
}

/// FNV-1a, used to give every named block its own RNG stream so a block's
/// initial values do not depend on which other blocks exist.
fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Glorot-uniform limit for a `rows × cols` weight.
fn glorot(rows: usize, cols: usize) -> f64 {
    (6.0 / (rows + cols) as f64).sqrt()
}

/// Slot names an architecture uses, in classifier order.
pub(crate) fn slot_names(config: &ModelConfig) -> Vec<String> {
    if config.is_joint() {
        vec!["joint".into()]
    } else {
        config.roles().iter().map(|r| r.short().to_string()).collect()
    }
}

pub(crate) fn feature_dim(config: &ModelConfig) -> usize {
    match config.architecture {
        Architecture::Conditional => config.hidden_dim,
        _ => config.hidden_dim * slot_names(config).len(),
    }
}

impl ModelParams {
    /// Fresh parameters. Weight matrices are Glorot-uniform, biases zero.
    /// Embeddings come from `table` when given, otherwise seeded
    /// uniform(-0.05, 0.05) with a zero padding row.
    pub fn init(config: &ModelConfig, vocab_size: usize, table: Option<&EmbeddingTable>, seed: u64) -> Result<Self> {
        config.validate()?;
        let (e, h, a) = (config.embedding_dim, config.hidden_dim, config.attention_dim);
        let embeddings = match table {
            Some(t) => {
                if t.dim != e || t.vectors.rows() != vocab_size {
                    return Err(Error::dim(
                        "embedding table",
                        format!("{vocab_size} x {e}"),
                        format!("{} x {}", t.vectors.rows(), t.dim),
                    ));
                }
                t.vectors.clone()
            }
            None => {
                let mut m = Matrix::zeros(vocab_size, e);
                let mut rng = Rng::derive(seed, stream_id("embeddings"));
                for r in 1..vocab_size {
                    for x in m.row_mut(r) {
                        *x = rng.uniform(-0.05, 0.05);
                    }
                }
                m
            }
        };
        let lstm = |name: &str, input: usize| {
            let mut rng = Rng::derive(seed, stream_id(name));
            LstmParams::uniform(h, input, glorot(h, h + input), &mut rng)
        };
        let attn = |name: &str, input: usize| {
            let mut rng = Rng::derive(seed, stream_id(name));
            AttentionParams::uniform(a, input, glorot(a, input), &mut rng)
        };
        let encoders = slot_names(config)
            .into_iter()
            .map(|slot| {
                let n = |part: &str| format!("{slot}.{part}");
                let enc = match config.architecture {
                    Architecture::Ct
                    | Architecture::CtConcatContext
                    | Architecture::MultiLstm
                    | Architecture::Conditional => EncoderParams {
                        word_lstm: Some(lstm(&n("word_lstm"), e)),
                        word_attn: None,
                        sent_lstm: None,
                        sent_attn: None,
                    },
                    Architecture::AttnSent => EncoderParams {
                        word_lstm: None,
                        word_attn: None,
                        sent_lstm: Some(lstm(&n("sent_lstm"), e)),
                        sent_attn: Some(attn(&n("sent_attn"), h)),
                    },
                    Architecture::AttnWord => EncoderParams {
                        word_lstm: Some(lstm(&n("word_lstm"), e)),
                        word_attn: Some(attn(&n("word_attn"), h)),
                        sent_lstm: None,
                        sent_attn: None,
                    },
                    Architecture::AttnWordSent => EncoderParams {
                        word_lstm: None,
                        word_attn: Some(attn(&n("word_attn"), e)),
                        sent_lstm: Some(lstm(&n("sent_lstm"), e)),
                        sent_attn: Some(attn(&n("sent_attn"), h)),
                    },
                };
                (slot, enc)
            })
            .collect();
        let f = feature_dim(config);
        let mut rng = Rng::derive(seed, stream_id("classifier.w"));
        let limit = glorot(NUM_CLASSES, f);
        Ok(ModelParams {
            embeddings,
            encoders,
            out_w: Matrix::uniform(NUM_CLASSES, f, -limit, limit, &mut rng),
            out_b: Matrix::zeros(NUM_CLASSES, 1),
        })
    }

    /// Same shapes, all zeros; used as a gradient buffer.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, m) in z.blocks_mut() {
            m.fill(0.0);
        }
        z
    }

    pub fn encoder(&self, slot: &str) -> Option<&EncoderParams> {
        self.encoders.iter().find(|(s, _)| s == slot).map(|(_, e)| e)
    }

    pub fn vocab_size(&self) -> usize {
        self.embeddings.rows()
    }

    pub fn embedding_dim(&self) -> usize {
        self.embeddings.cols()
    }

    /// `self += scale · other` block by block.
    pub fn add_scaled(&mut self, other: &ModelParams, scale: f64) -> Result<()> {
        let theirs = other.blocks();
        let mine = self.blocks_mut();
        if mine.len() != theirs.len() {
            return Err(Error::dim("ModelParams::add_scaled", mine.len(), theirs.len()));
        }
        for ((_, a), (_, b)) in mine.into_iter().zip(theirs) {
            a.add_scaled(b, scale)?;
        }
        Ok(())
    }

    /// Sum of squares of the regularized blocks (all blocks, or all but
    /// the embeddings when they are frozen).
    pub fn l2_norm_sq(&self, include_embeddings: bool) -> f64 {
        self.blocks()
            .into_iter()
            .filter(|(n, _)| include_embeddings || n != "embeddings")
            .map(|(_, m)| m.sum_squares())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::ContextUse;

    #[test]
    fn block_names_and_shapes() {
        let cfg = ModelConfig::new(Architecture::AttnWordSent, ContextUse::Pt).with_dims(4, 3, 5);
        let p = ModelParams::init(&cfg, 10, None, 1).unwrap();
        let names: Vec<String> = p.blocks().into_iter().map(|(n, _)| n).collect();
        assert!(names.contains(&"pt.word_attn.w".to_string()));
        assert!(names.contains(&"ct.sent_lstm.w_i".to_string()));
        assert_eq!(p.out_w.shape(), (2, 8));
        assert_eq!(p.encoder("ct").unwrap().sent_lstm.as_ref().unwrap().w_i.shape(), (4, 9));
        assert_eq!(p.embeddings.row(0), &[0.0; 5]);
    }

    #[test]
    fn init_independent_of_other_slots() {
        let a = ModelParams::init(&ModelConfig::new(Architecture::Ct, ContextUse::None).with_dims(4, 4, 3), 8, None, 5).unwrap();
        let b = ModelParams::init(&ModelConfig::new(Architecture::MultiLstm, ContextUse::None).with_dims(4, 4, 3), 8, None, 5).unwrap();
        assert_eq!(a, b);
        let c = ModelParams::init(&ModelConfig::new(Architecture::MultiLstm, ContextUse::Pt).with_dims(4, 4, 3), 8, None, 5).unwrap();
        assert_eq!(a.encoder("ct"), c.encoder("ct"));
    }
}
