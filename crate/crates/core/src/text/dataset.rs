use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConversationInstance, Label, Preprocessor, Turn, TurnRole};
use crate::error::{Error, Result};

/// One JSONL record. Each turn is either raw text (`prior`) or pre-split
/// units (`prior_sents`, one tweet per entry), not both.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRecord {
    pub id: String,
    /// `S` or `NS`; may be absent only in records read for prediction.
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_sents: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_sents: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub succeeding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub succeeding_sents: Option<Vec<String>>,
}

fn build_turn(
    prep: &Preprocessor,
    role: TurnRole,
    text: &Option<String>,
    units: &Option<Vec<String>>,
) -> std::result::Result<Option<Turn>, String> {
    match (text, units) {
        (Some(_), Some(_)) => Err(format!("both {role} text and pre-split sentences given")),
        (Some(t), None) => prep.turn(role, t).map(Some).map_err(|e| format!("{role}: {e}")),
        (None, Some(u)) => {
            let keep = if role == TurnRole::Prior {
                &u[u.len().saturating_sub(prep.config.max_prior_tweets)..]
            } else {
                &u[..]
            };
            prep.turn_from_units(role, keep)
                .map(Some)
                .map_err(|e| format!("{role}: {e}"))
        }
        (None, None) => Ok(None),
    }
}

impl RawRecord {
    pub fn into_instance(&self, prep: &Preprocessor) -> std::result::Result<ConversationInstance, String> {
        let label = Label::parse(&self.label).map_err(|e| e.to_string())?;
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        let prior = build_turn(prep, TurnRole::Prior, &self.prior, &self.prior_sents)?
            .ok_or("missing prior turn")?;
        let current = build_turn(prep, TurnRole::Current, &self.current, &self.current_sents)?
            .ok_or("missing current turn")?;
        let succeeding = build_turn(prep, TurnRole::Succeeding, &self.succeeding, &self.succeeding_sents)?;
        Ok(ConversationInstance {
            id: self.id.clone(),
            prior,
            current,
            succeeding,
            label,
        })
    }
}

fn parse_lines(
    source: &str,
    text: &str,
    prep: &Preprocessor,
    allow_unlabeled: bool,
) -> Result<Vec<(ConversationInstance, bool)>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: RawRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        let labeled = !rec.label.is_empty();
        if !labeled && allow_unlabeled {
            rec.label = Label::NotSarcastic.as_str().to_string();
        }
        let inst = rec.into_instance(prep).map_err(|m| Error::parse(source, i + 1, m))?;
        if !seen.insert(inst.id.clone()) {
            return Err(Error::parse(source, i + 1, format!("duplicate id '{}'", inst.id)));
        }
        out.push((inst, labeled));
    }
    if out.is_empty() {
        return Err(Error::Data(format!("{source}: no instances")));
    }
    Ok(out)
}

/// Parses a JSONL dataset. Blank lines are skipped; any bad record or
/// duplicate id is an error naming its line.
pub fn parse_dataset(source: &str, text: &str, prep: &Preprocessor) -> Result<Vec<ConversationInstance>> {
    Ok(parse_lines(source, text, prep, false)?.into_iter().map(|(i, _)| i).collect())
}

/// Like [`parse_dataset`] but records may omit `label`. Those come back
/// with `None` (their instance carries a placeholder label).
pub fn parse_unlabeled(source: &str, text: &str, prep: &Preprocessor) -> Result<Vec<(ConversationInstance, Option<Label>)>> {
    Ok(parse_lines(source, text, prep, true)?
        .into_iter()
        .map(|(i, labeled)| {
            let gold = labeled.then_some(i.label);
            (i, gold)
        })
        .collect())
}

pub fn load_dataset(path: impl AsRef<Path>, prep: &Preprocessor) -> Result<Vec<ConversationInstance>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&path.display().to_string(), &text, prep)
}
