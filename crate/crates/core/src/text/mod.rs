//! Text preparation: sentence splitting, tokenization, vocabulary,
//! fixed-size encoding and pre-trained embedding loading.

mod dataset;
mod embeddings;
mod encode;
mod tokenize;
mod vocab;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use dataset::{load_dataset, parse_dataset, parse_unlabeled, RawRecord};
pub use embeddings::{load_embeddings, EmbeddingTable, OovPolicy};
pub use encode::{encode_instance, encode_turn, EncodedInstance, EncodedTurn};
pub use tokenize::{apply_casing, is_all_caps_word, split_sentences, tokenize, Tokenizer};
pub use vocab::{Vocabulary, BOUNDARY_ID, BOUNDARY_TOKEN, PAD_ID, PAD_TOKEN, UNK_ID, UNK_TOKEN};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurnRole {
    Prior,
    Current,
    Succeeding,
}

impl TurnRole {
    /// Short prefix used in feature namespaces and parameter names.
    pub fn short(self) -> &'static str {
        match self {
            TurnRole::Prior => "pt",
            TurnRole::Current => "ct",
            TurnRole::Succeeding => "st",
        }
    }
}

impl fmt::Display for TurnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// Gold or predicted class. `S` is index 0 in every probability vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "S")]
    Sarcastic,
    #[serde(rename = "NS")]
    NotSarcastic,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Sarcastic, Label::NotSarcastic];

    pub fn index(self) -> usize {
        match self {
            Label::Sarcastic => 0,
            Label::NotSarcastic => 1,
        }
    }

    pub fn from_index(i: usize) -> Label {
        if i == 0 {
            Label::Sarcastic
        } else {
            Label::NotSarcastic
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Sarcastic => "S",
            Label::NotSarcastic => "NS",
        }
    }

    pub fn parse(s: &str) -> Result<Label> {
        match s {
            "S" => Ok(Label::Sarcastic),
            "NS" => Ok(Label::NotSarcastic),
            other => Err(Error::Data(format!("label must be \"S\" or \"NS\", got {other:?}"))),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A turn after preprocessing: at least one sentence, every sentence at
/// least one token.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub role: TurnRole,
    pub raw_text: String,
    pub sentences: Vec<Vec<String>>,
}

impl Turn {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences.iter().flatten().map(String::as_str)
    }

    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConversationInstance {
    pub id: String,
    pub prior: Turn,
    pub current: Turn,
    pub succeeding: Option<Turn>,
    pub label: Label,
}

impl ConversationInstance {
    pub fn turn(&self, role: TurnRole) -> Option<&Turn> {
        match role {
            TurnRole::Prior => Some(&self.prior),
            TurnRole::Current => Some(&self.current),
            TurnRole::Succeeding => self.succeeding.as_ref(),
        }
    }
}

/// Sentence/word caps and the Twitter thread limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepConfig {
    pub max_sents: usize,
    pub max_words: usize,
    /// Pre-split prior context (one tweet per entry) keeps only this many
    /// of the most recent entries.
    pub max_prior_tweets: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            max_sents: 10,
            max_words: 50,
            max_prior_tweets: 5,
        }
    }
}

/// Turns raw text into [`Turn`]s.
#[derive(Clone, Debug, Default)]
pub struct Preprocessor {
    pub tokenizer: Tokenizer,
    pub config: PrepConfig,
}

impl Preprocessor {
    pub fn new(tokenizer: Tokenizer, config: PrepConfig) -> Self {
        Preprocessor { tokenizer, config }
    }

    /// Splits `raw` into sentences and tokenizes each one.
    pub fn turn(&self, role: TurnRole, raw: &str) -> Result<Turn> {
        let sentences = split_sentences(raw)?
            .iter()
            .map(|s| self.tokenizer.tokenize(s))
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>();
        if sentences.is_empty() {
            return Err(Error::Empty("turn has no tokens"));
        }
        Ok(Turn {
            role,
            raw_text: raw.to_string(),
            sentences,
        })
    }

    /// Builds a turn from pre-split units (e.g. one tweet per entry); each
    /// unit becomes exactly one sentence.
    pub fn turn_from_units(&self, role: TurnRole, units: &[String]) -> Result<Turn> {
        let sentences = units
            .iter()
            .map(|u| self.tokenizer.tokenize(u))
            .filter(|t| !t.is_empty())
            .collect::<Vec<_>>();
        if sentences.is_empty() {
            return Err(Error::Empty("turn has no tokens"));
        }
        Ok(Turn {
            role,
            raw_text: units.join(" "),
            sentences,
        })
    }
}
