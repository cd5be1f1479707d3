use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One annotator's answer for one instance (one JSON object per line).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub instance_id: String,
    pub annotator_id: String,
    /// 1: which prior-turn sentences trigger the sarcastic reply.
    /// 2: which current-turn sentence is sarcastic, plus its triggers.
    pub task: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_sentence: Option<usize>,
    #[serde(default)]
    pub trigger_sentences: Vec<usize>,
}

/// What an overlap or agreement computation reads from each annotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Trigger sentences in the prior turn.
    Triggers,
    /// The sarcastic sentence of the current turn (task 2).
    CurrentSentence,
}

impl Annotation {
    pub fn selected(&self, what: Selection) -> Vec<usize> {
        match what {
            Selection::Triggers => {
                let set: BTreeSet<usize> = self.trigger_sentences.iter().copied().collect();
                set.into_iter().collect()
            }
            Selection::CurrentSentence => self.current_sentence.into_iter().collect(),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self.task {
            1 => {
                if self.current_sentence.is_some() {
                    return Err("task 1 annotations carry no current_sentence".into());
                }
            }
            2 => {
                if self.current_sentence.is_none() {
                    return Err("task 2 annotations need current_sentence".into());
                }
            }
            t => return Err(format!("task must be 1 or 2, got {t}")),
        }
        Ok(())
    }
}

/// Annotations grouped by instance id, then annotator order of appearance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnnotationSet {
    pub by_instance: BTreeMap<String, Vec<Annotation>>,
}

impl AnnotationSet {
    pub fn new(records: Vec<Annotation>) -> Result<Self> {
        let mut by_instance: BTreeMap<String, Vec<Annotation>> = BTreeMap::new();
        for r in records {
            r.validate().map_err(|m| Error::Data(format!("annotation for {}: {m}", r.instance_id)))?;
            let list = by_instance.entry(r.instance_id.clone()).or_default();
            if list.iter().any(|a| a.annotator_id == r.annotator_id && a.task == r.task) {
                return Err(Error::Data(format!(
                    "annotator {} appears twice for {} task {}",
                    r.annotator_id, r.instance_id, r.task
                )));
            }
            list.push(r);
        }
        Ok(AnnotationSet { by_instance })
    }

    /// Annotations of `task` per instance; instances without any are omitted.
    pub fn task(&self, task: u8) -> BTreeMap<&str, Vec<&Annotation>> {
        self.by_instance
            .iter()
            .filter_map(|(id, list)| {
                let v: Vec<&Annotation> = list.iter().filter(|a| a.task == task).collect();
                (!v.is_empty()).then_some((id.as_str(), v))
            })
            .collect()
    }

    /// Checks every selected index against the sentence count of its turn.
    pub fn check_ranges(&self, counts: impl Fn(&str, Selection) -> Option<usize>) -> Result<()> {
        for (id, list) in &self.by_instance {
            for a in list {
                for what in [Selection::Triggers, Selection::CurrentSentence] {
                    let Some(n) = counts(id, what) else { continue };
                    if let Some(bad) = a.selected(what).into_iter().find(|&i| i >= n) {
                        return Err(Error::Data(format!(
                            "annotation for {id} by {} selects sentence {bad} of {n}",
                            a.annotator_id
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn parse_annotations(source: &str, text: &str) -> Result<AnnotationSet> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let a: Annotation = serde_json::from_str(line).map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        a.validate().map_err(|m| Error::parse(source, i + 1, m))?;
        out.push(a);
    }
    AnnotationSet::new(out)
}

pub fn load_annotations(path: &Path) -> Result<AnnotationSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&path.display().to_string(), &text)
}
