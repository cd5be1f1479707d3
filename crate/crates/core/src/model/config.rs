use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TurnRole;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// One LSTM over the current turn.
    Ct,
    /// One LSTM over the context and current turn joined at the token level.
    CtConcatContext,
    /// One LSTM per turn, final states concatenated.
    MultiLstm,
    /// Context LSTM's final cell state initializes the next turn's LSTM.
    Conditional,
    /// Sentence-level attention over sentence LSTM annotations; sentences
    /// are average word embeddings.
    AttnSent,
    /// Word-level attention over word LSTM annotations.
    AttnWord,
    /// Hierarchical: word attention builds sentence vectors, then sentence
    /// LSTM with sentence attention.
    AttnWordSent,
}

impl Architecture {
    pub const ALL: [Architecture; 7] = [
        Architecture::Ct,
        Architecture::CtConcatContext,
        Architecture::MultiLstm,
        Architecture::Conditional,
        Architecture::AttnSent,
        Architecture::AttnWord,
        Architecture::AttnWordSent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Ct => "ct",
            Architecture::CtConcatContext => "ct_concat_context",
            Architecture::MultiLstm => "multi_lstm",
            Architecture::Conditional => "conditional",
            Architecture::AttnSent => "attn_sent",
            Architecture::AttnWord => "attn_word",
            Architecture::AttnWordSent => "attn_word_sent",
        }
    }

    pub fn has_attention(self) -> bool {
        matches!(self, Architecture::AttnSent | Architecture::AttnWord | Architecture::AttnWordSent)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Architecture::ALL.iter().map(|a| a.as_str()).collect();
                Error::Config(format!("unknown architecture '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextUse {
    #[default]
    None,
    Pt,
    St,
    PtSt,
}

impl ContextUse {
    pub fn as_str(self) -> &'static str {
        match self {
            ContextUse::None => "none",
            ContextUse::Pt => "pt",
            ContextUse::St => "st",
            ContextUse::PtSt => "pt+st",
        }
    }

    /// Turns read by the model, in classifier order `[pt, ct, st]`.
    pub fn roles(self) -> Vec<TurnRole> {
        match self {
            ContextUse::None => vec![TurnRole::Current],
            ContextUse::Pt => vec![TurnRole::Prior, TurnRole::Current],
            ContextUse::St => vec![TurnRole::Current, TurnRole::Succeeding],
            ContextUse::PtSt => vec![TurnRole::Prior, TurnRole::Current, TurnRole::Succeeding],
        }
    }
}

impl fmt::Display for ContextUse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContextUse {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ContextUse::None),
            "pt" => Ok(ContextUse::Pt),
            "st" => Ok(ContextUse::St),
            "pt+st" | "pt_st" => Ok(ContextUse::PtSt),
            _ => Err(Error::Config(format!("unknown context '{s}' (expected none, pt, st or pt+st)"))),
        }
    }
}

/// How attention models combine turns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionLayout {
    /// One encoder per turn; turn vectors concatenated.
    #[default]
    Separate,
    /// One encoder over the joined turns.
    Concat,
}

impl FromStr for AttentionLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separate" => Ok(AttentionLayout::Separate),
            "concat" => Ok(AttentionLayout::Concat),
            _ => Err(Error::Config(format!("unknown attention layout '{s}' (expected separate or concat)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub context: ContextUse,
    pub attention_layout: AttentionLayout,
    /// Keep only the last valid prior sentence (tweet).
    pub last_pt_only: bool,
    pub hidden_dim: usize,
    pub attention_dim: usize,
    pub embedding_dim: usize,
    pub train_embeddings: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            architecture: Architecture::Ct,
            context: ContextUse::None,
            attention_layout: AttentionLayout::Separate,
            last_pt_only: false,
            hidden_dim: 100,
            attention_dim: 100,
            embedding_dim: 100,
            train_embeddings: true,
        }
    }
}

/// Table-row style name, e.g. `attn_sent[ct+pt]`.
impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}", self.architecture, self.context)?;
        if self.attention_layout == AttentionLayout::Concat {
            f.write_str(",concat")?;
        }
        if self.last_pt_only {
            f.write_str(",last_pt")?;
        }
        f.write_str("]")
    }
}

impl ModelConfig {
    pub fn new(architecture: Architecture, context: ContextUse) -> Self {
        ModelConfig {
            architecture,
            context,
            ..ModelConfig::default()
        }
    }

    /// Sets hidden, attention and embedding sizes at once.
    pub fn with_dims(mut self, hidden: usize, attention: usize, embedding: usize) -> Self {
        self.hidden_dim = hidden;
        self.attention_dim = attention;
        self.embedding_dim = embedding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_dim == 0 || self.attention_dim == 0 || self.embedding_dim == 0 {
            return Err(Error::Config("hidden, attention and embedding dims must be positive".into()));
        }
        match (self.architecture, self.context) {
            (Architecture::Ct, c) if c != ContextUse::None => {
                return Err(Error::Config("architecture ct reads no context; use multi_lstm or ct_concat_context".into()))
            }
            (Architecture::CtConcatContext, ContextUse::None) => {
                return Err(Error::Config("ct_concat_context requires a context".into()))
            }
            (Architecture::Conditional, ContextUse::None) => {
                return Err(Error::Config("conditional encoding requires a context".into()))
            }
            _ => {}
        }
        if self.attention_layout == AttentionLayout::Concat && self.architecture != Architecture::AttnSent {
            return Err(Error::Config("the concat attention layout applies to attn_sent only".into()));
        }
        if self.last_pt_only && !matches!(self.context, ContextUse::Pt | ContextUse::PtSt) {
            return Err(Error::Config("last_pt_only requires the prior turn as context".into()));
        }
        Ok(())
    }

    pub fn roles(&self) -> Vec<TurnRole> {
        self.context.roles()
    }

    /// True when all turns are read by one encoder.
    pub fn is_joint(&self) -> bool {
        self.architecture == Architecture::CtConcatContext
            || (self.architecture == Architecture::AttnSent && self.attention_layout == AttentionLayout::Concat)
    }
}
