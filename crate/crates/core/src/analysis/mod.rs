//! Attention interpretation against human annotations: argmax sentences,
//! majority votes, overlap, inter-annotator agreement and heatmaps.

mod alpha;
mod annotations;
mod heatmap;

pub use alpha::{alpha_by_bucket, krippendorff_alpha_nominal, Alpha, BucketAlpha, SentenceBucket};
pub use annotations::{load_annotations, parse_annotations, Annotation, AnnotationSet, Selection};
pub use heatmap::{read_heatmaps, render_bars, write_heatmaps, HeatmapEntry};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AttentionRecord;
use crate::text::TurnRole;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxAttention {
    pub index: usize,
    /// Another unmasked position has the same maximal weight.
    pub tie: bool,
}

/// Argmax over unmasked positions, lowest index on ties.
pub fn argmax_masked(weights: &[f64], mask: &[bool]) -> Option<MaxAttention> {
    let mut best: Option<usize> = None;
    let mut tie = false;
    for (i, (&w, &m)) in weights.iter().zip(mask).enumerate() {
        if !m {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(b) if w > weights[b] => {
                best = Some(i);
                tie = false;
            }
            Some(b) if w == weights[b] => tie = true,
            _ => {}
        }
    }
    best.map(|index| MaxAttention { index, tie })
}

pub fn max_attention_sentence(record: &AttentionRecord, role: TurnRole) -> Result<MaxAttention> {
    let (w, m) = record
        .sentence_block(role)
        .ok_or_else(|| Error::Data(format!("no sentence attention for the {role} turn")))?;
    argmax_masked(&w, &m).ok_or_else(|| Error::Data(format!("no unmasked sentence in the {role} turn")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Majority {
    pub indices: BTreeSet<usize>,
    /// No index was chosen by more than half the annotators; `indices`
    /// then holds the most-voted ones.
    pub no_majority: bool,
}

/// Indices picked by strictly more than half of the annotators. Each
/// annotator's selection is a set of indices.
pub fn majority_selection(selections: &[Vec<usize>]) -> Result<Majority> {
    if selections.is_empty() {
        return Err(Error::Empty("annotations for majority vote"));
    }
    let votes = vote_counts(selections);
    let half = selections.len() as f64 / 2.0;
    let indices: BTreeSet<usize> = votes.iter().filter(|(_, &v)| v as f64 > half).map(|(&i, _)| i).collect();
    if !indices.is_empty() {
        return Ok(Majority { indices, no_majority: false });
    }
    let top = votes.values().copied().max().unwrap_or(0);
    Ok(Majority {
        indices: votes.iter().filter(|(_, &v)| v == top && v > 0).map(|(&i, _)| i).collect(),
        no_majority: true,
    })
}

/// Number of annotators selecting each index.
pub fn vote_counts(selections: &[Vec<usize>]) -> BTreeMap<usize, usize> {
    let mut votes = BTreeMap::new();
    for sel in selections {
        let set: BTreeSet<usize> = sel.iter().copied().collect();
        for i in set {
            *votes.entry(i).or_insert(0) += 1;
        }
    }
    votes
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapDetail {
    pub instance_id: String,
    pub max_attention: MaxAttention,
    pub majority: Majority,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub n_instances: usize,
    pub n_matches: usize,
    pub percentage: f64,
    pub details: Vec<OverlapDetail>,
}

/// Share of annotated instances whose max-attention sentence of `role` is
/// in the annotators' majority selection. Every annotated instance needs a
/// record; records without annotations are ignored.
pub fn attention_annotation_overlap(
    records: &BTreeMap<String, AttentionRecord>,
    annotations: &AnnotationSet,
    task: u8,
    selection: Selection,
    role: TurnRole,
) -> Result<OverlapReport> {
    let mut details = Vec::new();
    for (id, anns) in annotations.task(task) {
        let record = records
            .get(id)
            .ok_or_else(|| Error::Data(format!("annotated instance {id} has no attention record")))?;
        let max_attention = max_attention_sentence(record, role)?;
        let sels: Vec<Vec<usize>> = anns.iter().map(|a| a.selected(selection)).collect();
        let majority = majority_selection(&sels)?;
        details.push(OverlapDetail {
            instance_id: id.to_string(),
            matched: majority.indices.contains(&max_attention.index),
            max_attention,
            majority,
        });
    }
    if details.is_empty() {
        return Err(Error::Data(format!("no task {task} annotations to compare")));
    }
    let n_matches = details.iter().filter(|d| d.matched).count();
    Ok(OverlapReport {
        n_instances: details.len(),
        n_matches,
        percentage: 100.0 * n_matches as f64 / details.len() as f64,
        details,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerHistograms {
    /// Percentage of instances by number of distinct trigger selections
    /// made across their annotators.
    pub distinct_selections: BTreeMap<usize, f64>,
    /// Percentage of individual selections by how many sentences they mark
    /// as triggers.
    pub selection_sizes: BTreeMap<usize, f64>,
}

fn percentages(counts: BTreeMap<usize, usize>) -> BTreeMap<usize, f64> {
    let total: usize = counts.values().sum();
    counts
        .into_iter()
        .map(|(k, c)| (k, 100.0 * c as f64 / total as f64))
        .collect()
}

/// Histograms over task-1 trigger selections. Bins `1..=5` of the first
/// histogram are always present.
pub fn trigger_distribution(annotations: &AnnotationSet) -> TriggerHistograms {
    let mut distinct: BTreeMap<usize, usize> = (1..=5).map(|k| (k, 0)).collect();
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for anns in annotations.task(1).values() {
        let patterns: BTreeSet<Vec<usize>> = anns.iter().map(|a| a.selected(Selection::Triggers)).collect();
        *distinct.entry(patterns.len()).or_insert(0) += 1;
        for a in anns {
            *sizes.entry(a.selected(Selection::Triggers).len()).or_insert(0) += 1;
        }
    }
    let any = distinct.values().any(|c| *c > 0);
    TriggerHistograms {
        distinct_selections: if any {
            percentages(distinct)
        } else {
            distinct.into_keys().map(|k| (k, 0.0)).collect()
        },
        selection_sizes: percentages(sizes),
    }
}

/// Units for α: per annotated instance, its sentence count and each
/// annotator's selection as one nominal category.
pub fn alpha_units(
    annotations: &AnnotationSet,
    task: u8,
    selection: Selection,
    sentence_count: impl Fn(&str) -> Option<usize>,
) -> Result<Vec<(usize, Vec<Vec<usize>>)>> {
    annotations
        .task(task)
        .into_iter()
        .map(|(id, anns)| {
            let n = sentence_count(id).ok_or_else(|| Error::Data(format!("annotated instance {id} not in data")))?;
            Ok((n, anns.iter().map(|a| a.selected(selection)).collect()))
        })
        .collect()
}
