use serde::{Deserialize, Serialize};

use super::{ConversationInstance, Label, PrepConfig, Turn, Vocabulary, PAD_ID};
use crate::error::{Error, Result};

/// Fixed-size id grid of one turn. Masked positions hold [`PAD_ID`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedTurn {
    pub max_sents: usize,
    pub max_words: usize,
    /// Row-major `max_sents × max_words`.
    pub ids: Vec<u32>,
    pub sent_mask: Vec<bool>,
    /// Row-major `max_sents × max_words`.
    pub word_mask: Vec<bool>,
    /// True if sentences or words were dropped by the caps.
    pub truncated: bool,
}

impl EncodedTurn {
    /// A turn with every position masked.
    pub fn padding(max_sents: usize, max_words: usize) -> Self {
        EncodedTurn {
            max_sents,
            max_words,
            ids: vec![PAD_ID; max_sents * max_words],
            sent_mask: vec![false; max_sents],
            word_mask: vec![false; max_sents * max_words],
            truncated: false,
        }
    }

    pub fn id(&self, s: usize, w: usize) -> u32 {
        self.ids[s * self.max_words + w]
    }

    pub fn word_valid(&self, s: usize, w: usize) -> bool {
        self.word_mask[s * self.max_words + w]
    }

    /// Valid ids of sentence `s`, in order.
    pub fn sentence_ids(&self, s: usize) -> Vec<u32> {
        (0..self.max_words)
            .filter(|&w| self.word_valid(s, w))
            .map(|w| self.id(s, w))
            .collect()
    }

    pub fn num_sentences(&self) -> usize {
        self.sent_mask.iter().filter(|m| **m).count()
    }

    pub fn num_words(&self) -> usize {
        self.word_mask.iter().filter(|m| **m).count()
    }

    /// Retained tokens per valid sentence.
    pub fn decode(&self, vocab: &Vocabulary) -> Vec<Vec<String>> {
        (0..self.max_sents)
            .filter(|&s| self.sent_mask[s])
            .map(|s| {
                self.sentence_ids(s)
                    .into_iter()
                    .map(|id| vocab.token(id).unwrap_or(super::UNK_TOKEN).to_string())
                    .collect()
            })
            .collect()
    }
}

/// Keeps the first `max_sents` sentences and first `max_words` tokens of
/// each; unknown tokens map to the unknown id.
pub fn encode_turn(turn: &Turn, vocab: &Vocabulary, caps: &PrepConfig) -> Result<EncodedTurn> {
    let (ms, mw) = (caps.max_sents, caps.max_words);
    if ms == 0 || mw == 0 {
        return Err(Error::Config("max_sents and max_words must be positive".into()));
    }
    if turn.sentences.is_empty() || turn.sentences.iter().all(Vec::is_empty) {
        return Err(Error::Empty("turn to encode"));
    }
    let mut enc = EncodedTurn {
        max_sents: ms,
        max_words: mw,
        ids: vec![PAD_ID; ms * mw],
        sent_mask: vec![false; ms],
        word_mask: vec![false; ms * mw],
        truncated: turn.sentences.len() > ms,
    };
    let mut row = 0;
    for sent in turn.sentences.iter().filter(|s| !s.is_empty()).take(ms) {
        enc.sent_mask[row] = true;
        enc.truncated |= sent.len() > mw;
        for (w, tok) in sent.iter().take(mw).enumerate() {
            enc.ids[row * mw + w] = vocab.id(tok);
            enc.word_mask[row * mw + w] = true;
        }
        row += 1;
    }
    Ok(enc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedInstance {
    pub id: String,
    pub label: Label,
    pub prior: EncodedTurn,
    pub current: EncodedTurn,
    pub succeeding: Option<EncodedTurn>,
}

pub fn encode_instance(
    inst: &ConversationInstance,
    vocab: &Vocabulary,
    caps: &PrepConfig,
) -> Result<EncodedInstance> {
    Ok(EncodedInstance {
        id: inst.id.clone(),
        label: inst.label,
        prior: encode_turn(&inst.prior, vocab, caps)?,
        current: encode_turn(&inst.current, vocab, caps)?,
        succeeding: inst
            .succeeding
            .as_ref()
            .map(|t| encode_turn(t, vocab, caps))
            .transpose()?,
    })
}
