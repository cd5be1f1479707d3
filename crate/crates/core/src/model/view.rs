//! Compact views of encoded turns: only unmasked sentences and words, each
//! remembering where it sits in the padded grid.

use crate::error::{Error, Result};
use crate::text::{EncodedInstance, EncodedTurn, TurnRole, BOUNDARY_ID};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SentView {
    pub ids: Vec<u32>,
    /// Word index in the grid row for each id.
    pub word_pos: Vec<usize>,
    /// Grid row, `None` for a turn-boundary sentence.
    pub row: Option<usize>,
    /// Position in the sentence-level attention block.
    pub sent_pos: usize,
}

/// A segment of a sentence-level attention block.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    /// `None` for a turn boundary.
    pub role: Option<TurnRole>,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct TurnView {
    pub sents: Vec<SentView>,
    /// Length of the sentence-level attention block.
    pub block_len: usize,
    pub max_words: usize,
    pub max_sents: usize,
    pub segments: Vec<Segment>,
}

impl TurnView {
    pub fn tokens(&self) -> impl Iterator<Item = u32> + '_ {
        self.sents.iter().flat_map(|s| s.ids.iter().copied())
    }
}

pub(crate) fn turn_view(enc: &EncodedTurn, role: TurnRole, last_only: bool) -> TurnView {
    let mut sents: Vec<SentView> = (0..enc.max_sents)
        .filter(|&s| enc.sent_mask[s])
        .filter_map(|s| {
            let word_pos: Vec<usize> = (0..enc.max_words).filter(|&w| enc.word_valid(s, w)).collect();
            if word_pos.is_empty() {
                return None;
            }
            Some(SentView {
                ids: word_pos.iter().map(|&w| enc.id(s, w)).collect(),
                word_pos,
                row: Some(s),
                sent_pos: s,
            })
        })
        .collect();
    if last_only && sents.len() > 1 {
        sents.drain(..sents.len() - 1);
    }
    TurnView {
        sents,
        block_len: enc.max_sents,
        max_words: enc.max_words,
        max_sents: enc.max_sents,
        segments: vec![Segment {
            role: Some(role),
            start: 0,
            len: enc.max_sents,
        }],
    }
}

/// Joins turn views with one boundary sentence (a single `<turn>` token)
/// between consecutive turns.
pub(crate) fn joint_view(parts: Vec<(TurnRole, TurnView)>) -> TurnView {
    let mut out = TurnView {
        sents: Vec::new(),
        block_len: 0,
        max_words: parts.first().map(|(_, v)| v.max_words).unwrap_or(0),
        max_sents: 0,
        segments: Vec::new(),
    };
    let n = parts.len();
    for (k, (role, view)) in parts.into_iter().enumerate() {
        let offset = out.block_len;
        out.segments.push(Segment {
            role: Some(role),
            start: offset,
            len: view.block_len,
        });
        for mut s in view.sents {
            s.sent_pos += offset;
            out.sents.push(s);
        }
        out.block_len += view.block_len;
        if k + 1 < n {
            out.segments.push(Segment {
                role: None,
                start: out.block_len,
                len: 1,
            });
            out.sents.push(SentView {
                ids: vec![BOUNDARY_ID],
                word_pos: vec![0],
                row: None,
                sent_pos: out.block_len,
            });
            out.block_len += 1;
        }
    }
    out
}

pub(crate) fn encoded_turn(inst: &EncodedInstance, role: TurnRole) -> Result<&EncodedTurn> {
    match role {
        TurnRole::Prior => Ok(&inst.prior),
        TurnRole::Current => Ok(&inst.current),
        TurnRole::Succeeding => inst
            .succeeding
            .as_ref()
            .ok_or_else(|| Error::Data(format!("instance {} has no succeeding turn", inst.id))),
    }
}
