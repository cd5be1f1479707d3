use serde::{Deserialize, Serialize};

use crate::lexicons::{LexiconSet, Polarity};
use crate::text::{ConversationInstance, Turn, TurnRole};

/// Turn-level sentiment counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnSentiment {
    /// `(lexicon name, positive tokens, negative tokens)` per sentiment lexicon.
    pub per_lexicon: Vec<(String, usize, usize)>,
    /// Positive/negative counts using the first lexicon that lists a token.
    pub positive: usize,
    pub negative: usize,
    pub negations: usize,
    pub both: bool,
}

impl TurnSentiment {
    /// Positive or negative when one count exceeds the other, else neutral.
    pub fn dominant(&self) -> Polarity {
        match self.positive.cmp(&self.negative) {
            std::cmp::Ordering::Greater => Polarity::Positive,
            std::cmp::Ordering::Less => Polarity::Negative,
            std::cmp::Ordering::Equal => Polarity::Neutral,
        }
    }
}

pub fn turn_sentiment(turn: &Turn, lexicons: &LexiconSet) -> TurnSentiment {
    let per_lexicon = lexicons
        .sentiment
        .iter()
        .map(|lex| {
            let (mut p, mut n) = (0, 0);
            for t in turn.tokens() {
                match lex.lookup(t).map(|e| e.polarity) {
                    Some(Polarity::Positive) => p += 1,
                    Some(Polarity::Negative) => n += 1,
                    _ => {}
                }
            }
            (lex.name.clone(), p, n)
        })
        .collect::<Vec<_>>();
    let (mut positive, mut negative) = (0, 0);
    for t in turn.tokens() {
        match lexicons.sentiment_of(t).map(|e| e.polarity) {
            Some(Polarity::Positive) => positive += 1,
            Some(Polarity::Negative) => negative += 1,
            _ => {}
        }
    }
    let both = per_lexicon.iter().any(|(_, p, _)| *p > 0) && per_lexicon.iter().any(|(_, _, n)| *n > 0);
    TurnSentiment {
        per_lexicon,
        positive,
        negative,
        negations: turn.tokens().filter(|t| lexicons.negations.contains(t)).count(),
        both,
    }
}

/// Named sentiment features for the given turns. With the prior turn among
/// `roles`, adds `incongruity`: the current turn's dominant polarity differs
/// from the prior turn's.
pub fn sentiment_features(
    inst: &ConversationInstance,
    roles: &[TurnRole],
    lexicons: &LexiconSet,
) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for &role in roles {
        let Some(turn) = inst.turn(role) else { continue };
        let s = turn_sentiment(turn, lexicons);
        for (name, p, n) in &s.per_lexicon {
            out.push((format!("{role}:sent:{name}:pos"), *p as f64));
            out.push((format!("{role}:sent:{name}:neg"), *n as f64));
        }
        out.push((format!("{role}:sent:negations"), s.negations as f64));
        out.push((format!("{role}:sent:both"), if s.both { 1.0 } else { 0.0 }));
    }
    if roles.contains(&TurnRole::Prior) && roles.contains(&TurnRole::Current) {
        let ct = turn_sentiment(&inst.current, lexicons).dominant();
        let pt = turn_sentiment(&inst.prior, lexicons).dominant();
        out.push(("incongruity".to_string(), if ct != pt { 1.0 } else { 0.0 }));
    }
    out
}
