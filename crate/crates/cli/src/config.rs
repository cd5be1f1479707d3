//! Flat `key = value` run configuration.
//!
//! One setting per line; `#` starts a comment. Later assignments win, so
//! flags applied after the file override it.

use std::path::Path;

use serde::Serialize;

use sarc_core::baseline::{BaselineConfig, FeatureKind, LinearHyper};
use sarc_core::model::ModelConfig;
use sarc_core::text::PrepConfig;
use sarc_core::train::{Hyperparams, SplitSpec};

use crate::CliError;

/// Everything a run depends on besides its input files.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub hyper: Hyperparams,
    pub prep: PrepConfig,
    pub vocab_min_count: usize,
    pub split: SplitSpec,
    pub baseline: BaselineConfig,
    pub linear: LinearHyper,
    #[serde(skip)]
    split_seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            hyper: Hyperparams::default(),
            prep: PrepConfig::default(),
            vocab_min_count: 1,
            split: SplitSpec::default(),
            baseline: BaselineConfig::default(),
            linear: LinearHyper::default(),
            split_seed: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "arch",
    "context",
    "attention_layout",
    "last_pt_only",
    "hidden_dim",
    "attention_dim",
    "embedding_dim",
    "train_embeddings",
    "dropout",
    "batch_size",
    "l2",
    "epochs",
    "learning_rate",
    "optimizer",
    "seed",
    "class_weighting",
    "eval_train",
    "max_sents",
    "max_words",
    "max_prior_tweets",
    "vocab_min_count",
    "split_train",
    "split_dev",
    "split_test",
    "split_seed",
    "features",
    "n_max",
    "ngram_min_count",
    "min_df",
    "binary",
    "linear_epochs",
    "linear_lambda",
    "linear_eta0",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid value '{value}' for {key}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Usage(format!("invalid value '{value}' for {key}: expected true or false"))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let v = value.trim();
        match key {
            "arch" => self.model.architecture = parse(key, v)?,
            "context" => self.model.context = parse(key, v)?,
            "attention_layout" => self.model.attention_layout = parse(key, v)?,
            "last_pt_only" => self.model.last_pt_only = parse_bool(key, v)?,
            "hidden_dim" => self.model.hidden_dim = parse(key, v)?,
            "attention_dim" => self.model.attention_dim = parse(key, v)?,
            "embedding_dim" => self.model.embedding_dim = parse(key, v)?,
            "train_embeddings" => self.model.train_embeddings = parse_bool(key, v)?,
            "dropout" => self.hyper.dropout = parse(key, v)?,
            "batch_size" => self.hyper.batch_size = parse(key, v)?,
            "l2" => self.hyper.l2 = parse(key, v)?,
            "epochs" => self.hyper.epochs = parse(key, v)?,
            "learning_rate" => self.hyper.learning_rate = parse(key, v)?,
            "optimizer" => self.hyper.optimizer = parse(key, v)?,
            "seed" => self.set_seed(parse(key, v)?),
            "class_weighting" => self.hyper.class_weighting = parse_bool(key, v)?,
            "eval_train" => self.hyper.eval_train = parse_bool(key, v)?,
            "max_sents" => self.prep.max_sents = parse(key, v)?,
            "max_words" => self.prep.max_words = parse(key, v)?,
            "max_prior_tweets" => self.prep.max_prior_tweets = parse(key, v)?,
            "vocab_min_count" => self.vocab_min_count = parse(key, v)?,
            "split_train" => self.split.train = parse(key, v)?,
            "split_dev" => self.split.dev = parse(key, v)?,
            "split_test" => self.split.test = parse(key, v)?,
            "split_seed" => {
                let s = parse(key, v)?;
                self.split_seed = Some(s);
                self.split.seed = s;
            }
            "features" => {
                self.baseline.kind = match v {
                    "discrete" => FeatureKind::Discrete,
                    "tfidf" => FeatureKind::Tfidf,
                    _ => return Err(CliError::Usage(format!("invalid value '{v}' for features: expected discrete or tfidf"))),
                }
            }
            "n_max" => self.baseline.n_max = parse(key, v)?,
            "ngram_min_count" => self.baseline.min_count = parse(key, v)?,
            "min_df" => self.baseline.min_df = parse(key, v)?,
            "binary" => self.baseline.binary = parse_bool(key, v)?,
            "linear_epochs" => self.linear.epochs = parse(key, v)?,
            "linear_lambda" => self.linear.lambda = parse(key, v)?,
            "linear_eta0" => self.linear.eta0 = parse(key, v)?,
            _ => return Err(CliError::Usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Seeds training, the linear baseline and (unless `split_seed` was
    /// given) the split.
    pub fn set_seed(&mut self, seed: u64) {
        self.hyper.seed = seed;
        self.linear.seed = seed;
        if self.split_seed.is_none() {
            self.split.seed = seed;
        }
    }

    /// Applies every assignment in `text`.
    pub fn apply_text(&mut self, source: &str, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{source}:{}: expected key = value", i + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| CliError::Usage(format!("{source}:{}: {}", i + 1, e.message())))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| sarc_core::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        self.apply_text(&path.display().to_string(), &text)
    }

    /// `key=value` overrides from the command line.
    pub fn apply_overrides(&mut self, pairs: &[String]) -> Result<(), CliError> {
        for p in pairs {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got '{p}'")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model.validate()?;
        self.hyper.validate()?;
        if self.prep.max_sents == 0 || self.prep.max_words == 0 {
            return Err(CliError::Usage("max_sents and max_words must be positive".into()));
        }
        if self.vocab_min_count == 0 {
            return Err(CliError::Usage("vocab_min_count must be at least 1".into()));
        }
        Ok(())
    }

    /// Flat `key = value` rendering; parsing it back yields the same config.
    pub fn to_text(&self) -> String {
        let m = &self.model;
        let h = &self.hyper;
        let b = &self.baseline;
        let layout = match m.attention_layout {
            sarc_core::model::AttentionLayout::Separate => "separate",
            sarc_core::model::AttentionLayout::Concat => "concat",
        };
        let kind = match b.kind {
            FeatureKind::Discrete => "discrete",
            FeatureKind::Tfidf => "tfidf",
        };
        let mut lines = vec![
            format!("arch = {}", m.architecture),
            format!("context = {}", m.context),
            format!("attention_layout = {layout}"),
            format!("last_pt_only = {}", m.last_pt_only),
            format!("hidden_dim = {}", m.hidden_dim),
            format!("attention_dim = {}", m.attention_dim),
            format!("embedding_dim = {}", m.embedding_dim),
            format!("train_embeddings = {}", m.train_embeddings),
            format!("dropout = {}", h.dropout),
            format!("batch_size = {}", h.batch_size),
            format!("l2 = {}", h.l2),
            format!("epochs = {}", h.epochs),
            format!("learning_rate = {}", h.learning_rate),
            format!("optimizer = {}", h.optimizer),
            format!("seed = {}", h.seed),
            format!("class_weighting = {}", h.class_weighting),
            format!("eval_train = {}", h.eval_train),
            format!("max_sents = {}", self.prep.max_sents),
            format!("max_words = {}", self.prep.max_words),
            format!("max_prior_tweets = {}", self.prep.max_prior_tweets),
            format!("vocab_min_count = {}", self.vocab_min_count),
            format!("split_train = {}", self.split.train),
            format!("split_dev = {}", self.split.dev),
            format!("split_test = {}", self.split.test),
        ];
        if let Some(s) = self.split_seed {
            lines.push(format!("split_seed = {s}"));
        }
        lines.extend([
            format!("features = {kind}"),
            format!("n_max = {}", b.n_max),
            format!("ngram_min_count = {}", b.min_count),
            format!("min_df = {}", b.min_df),
            format!("binary = {}", b.binary),
            format!("linear_epochs = {}", self.linear.epochs),
            format!("linear_lambda = {}", self.linear.lambda),
            format!("linear_eta0 = {}", self.linear.eta0),
        ]);
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}
