//! Discrete-feature and tf-idf baselines with a linear max-margin
//! classifier.
//!
//! Feature names are namespaced by turn (`ct:`, `pt:`, `st:`), so a model
//! trained with context keeps the features of each turn separate.

mod linear;
mod ngrams;
mod sentiment;
mod sparse;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use linear::{hinge_objective, predict_linear, train_linear, LinearHyper, LinearModel};
pub use ngrams::ngram_counts;
pub use sentiment::{sentiment_features, turn_sentiment, TurnSentiment};
pub use sparse::{FeatureIndex, SparseVector};

use crate::error::{Error, Result};
use crate::lexicons::{detect_markers, LexiconSet};
use crate::text::{ConversationInstance, Turn, TurnRole};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// N-grams, lexicon categories, turn sentiment and sarcasm markers.
    Discrete,
    /// tf-idf weighted n-grams only.
    Tfidf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub kind: FeatureKind,
    /// Turns whose features are used; must include the current turn.
    pub roles: Vec<TurnRole>,
    pub n_max: usize,
    /// Minimum training-corpus count of an n-gram (discrete features).
    pub min_count: usize,
    /// Minimum number of training turns containing an n-gram (tf-idf).
    pub min_df: usize,
    /// Presence instead of counts for discrete n-gram features.
    pub binary: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            kind: FeatureKind::Discrete,
            roles: vec![TurnRole::Current],
            n_max: 3,
            min_count: 5,
            min_df: 5,
            binary: false,
        }
    }
}

/// `tf · ln(N / df)` for every n-gram of `counts` with `df >= min_df`.
/// An n-gram retained by the threshold but with `df = 0` is an error.
pub fn tfidf_transform(
    counts: &BTreeMap<String, usize>,
    doc_freq: &BTreeMap<String, usize>,
    n_turns: usize,
    min_df: usize,
) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (gram, &tf) in counts {
        let df = doc_freq.get(gram).copied().unwrap_or(0);
        if df < min_df.max(1) {
            if df == 0 && min_df == 0 {
                return Err(Error::Data(format!("n-gram '{gram}' retained with df = 0")));
            }
            continue;
        }
        if df > n_turns {
            return Err(Error::Data(format!("df {df} of '{gram}' exceeds {n_turns} turns")));
        }
        out.insert(gram.clone(), tf as f64 * (n_turns as f64 / df as f64).ln());
    }
    Ok(out)
}

/// Fitted feature extraction: thresholds and the index come from training
/// data only and never change afterwards.
#[derive(Clone, Debug)]
pub struct FeaturePipeline {
    pub config: BaselineConfig,
    pub index: FeatureIndex,
    kept_ngrams: BTreeSet<String>,
    doc_freq: BTreeMap<String, usize>,
    n_turns: usize,
    lexicons: LexiconSet,
}

impl FeaturePipeline {
    pub fn fit(train: &[ConversationInstance], lexicons: &LexiconSet, config: BaselineConfig) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty("baseline training data"));
        }
        if !config.roles.contains(&TurnRole::Current) {
            return Err(Error::Config("baseline features must include the current turn".into()));
        }
        if config.n_max == 0 {
            return Err(Error::Config("n_max must be at least 1".into()));
        }
        if config.kind == FeatureKind::Discrete && lexicons.sentiment.is_empty() {
            return Err(Error::Config(
                "discrete features need at least one sentiment lexicon".into(),
            ));
        }
        let mut totals: BTreeMap<String, usize> = BTreeMap::new();
        let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_turns = 0;
        for inst in train {
            for turn in config.roles.iter().filter_map(|r| inst.turn(*r)) {
                n_turns += 1;
                for (g, c) in ngram_counts(&turn.sentences, config.n_max, &lexicons.stop_words) {
                    *doc_freq.entry(g.clone()).or_default() += 1;
                    *totals.entry(g).or_default() += c;
                }
            }
        }
        let kept_ngrams = match config.kind {
            FeatureKind::Discrete => totals
                .into_iter()
                .filter(|(_, c)| *c >= config.min_count)
                .map(|(g, _)| g)
                .collect(),
            FeatureKind::Tfidf => doc_freq
                .iter()
                .filter(|(_, df)| **df >= config.min_df.max(1))
                .map(|(g, _)| g.clone())
                .collect(),
        };
        let mut pipeline = FeaturePipeline {
            config,
            index: FeatureIndex::new(),
            kept_ngrams,
            doc_freq,
            n_turns,
            lexicons: lexicons.clone(),
        };
        let mut index = FeatureIndex::new();
        for inst in train {
            for (name, _) in pipeline.named_features(inst)? {
                index.intern(&name);
            }
        }
        index.freeze();
        pipeline.index = index;
        Ok(pipeline)
    }

    pub fn n_turns(&self) -> usize {
        self.n_turns
    }

    pub fn doc_freq(&self) -> &BTreeMap<String, usize> {
        &self.doc_freq
    }

    pub fn kept_ngrams(&self) -> &BTreeSet<String> {
        &self.kept_ngrams
    }

    fn turn_ngrams(&self, turn: &Turn) -> Result<Vec<(String, f64)>> {
        let counts: BTreeMap<String, usize> =
            ngram_counts(&turn.sentences, self.config.n_max, &self.lexicons.stop_words)
                .into_iter()
                .filter(|(g, _)| self.kept_ngrams.contains(g))
                .collect();
        let prefix = turn.role.short();
        Ok(match self.config.kind {
            FeatureKind::Discrete => counts
                .into_iter()
                .map(|(g, c)| {
                    let v = if self.config.binary { 1.0 } else { c as f64 };
                    (format!("{prefix}:ng:{g}"), v)
                })
                .collect(),
            FeatureKind::Tfidf => tfidf_transform(&counts, &self.doc_freq, self.n_turns, self.config.min_df)?
                .into_iter()
                .map(|(g, v)| (format!("{prefix}:ng:{g}"), v))
                .collect(),
        })
    }

    /// All named features of one instance, before index lookup.
    pub fn named_features(&self, inst: &ConversationInstance) -> Result<Vec<(String, f64)>> {
        let mut out = Vec::new();
        for &role in &self.config.roles {
            let Some(turn) = inst.turn(role) else { continue };
            out.extend(self.turn_ngrams(turn)?);
            if self.config.kind == FeatureKind::Tfidf {
                continue;
            }
            let mut cats = BTreeSet::new();
            for lex in &self.lexicons.categories {
                for tok in turn.tokens() {
                    for c in lex.lookup(tok) {
                        cats.insert(format!("{role}:cat:{}:{c}", lex.name));
                    }
                }
            }
            out.extend(cats.into_iter().map(|c| (c, 1.0)));
            for (name, v) in detect_markers(turn, &self.lexicons)?.named_values() {
                out.push((format!("{role}:mk:{name}"), v));
            }
        }
        if self.config.kind == FeatureKind::Discrete {
            out.extend(sentiment_features(inst, &self.config.roles, &self.lexicons));
        }
        Ok(out)
    }

    /// Sparse vector over the frozen index; unseen features are dropped.
    pub fn transform(&self, inst: &ConversationInstance) -> Result<SparseVector> {
        let named = self.named_features(inst)?;
        self.index.vectorize(named.iter().map(|(n, v)| (n.as_str(), *v)))
    }
}
