//! Tab-separated lexicon files.
//!
//! Every lexicon is a UTF-8 text file with one entry per line:
//! `token[TAB]label`. A trailing `*` on the token marks a stem entry that
//! matches any token with that prefix. Blank lines are ignored; more than
//! two columns is a parse error.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "positive" | "pos" => Some(Polarity::Positive),
            "negative" | "neg" => Some(Polarity::Negative),
            "neutral" | "neu" | "both" => Some(Polarity::Neutral),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strength {
    Weak,
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SentimentEntry {
    pub polarity: Polarity,
    pub strength: Option<Strength>,
}

/// Which file layout to expect in [`load_lexicon`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LexiconKind {
    /// `token[TAB]cat1,cat2,...`
    Category,
    /// `token[TAB][weak_|strong_]positive|negative|neutral`
    Sentiment,
    /// `token` (one entry per line; entries may contain spaces)
    WordList,
    /// `emoticon[TAB polarity]`
    Emoticon,
}

#[derive(Clone, Debug)]
pub enum Lexicon {
    Category(CategoryLexicon),
    Sentiment(SentimentLexicon),
    WordList(WordList),
    Emoticon(EmoticonList),
}

/// Token or stem to category labels (LIWC / WordNet-Affect style).
#[derive(Clone, Debug, Default)]
pub struct CategoryLexicon {
    pub name: String,
    exact: BTreeMap<String, BTreeSet<String>>,
    stems: BTreeMap<String, BTreeSet<String>>,
}

impl CategoryLexicon {
    pub fn new(name: impl Into<String>) -> Self {
        CategoryLexicon {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn insert(&mut self, entry: &str, category: &str) {
        let (key, stem) = split_stem(entry);
        let map = if stem { &mut self.stems } else { &mut self.exact };
        map.entry(key.to_lowercase())
            .or_default()
            .insert(category.to_string());
    }

    /// All categories the token falls into: its exact entry plus every
    /// stem entry that prefixes it.
    pub fn lookup(&self, token: &str) -> BTreeSet<&str> {
        let token = token.to_lowercase();
        let mut out = BTreeSet::new();
        if let Some(cats) = self.exact.get(&token) {
            out.extend(cats.iter().map(String::as_str));
        }
        for (stem, cats) in &self.stems {
            if token.starts_with(stem.as_str()) {
                out.extend(cats.iter().map(String::as_str));
            }
        }
        out
    }

    pub fn categories(&self) -> BTreeSet<&str> {
        self.exact
            .values()
            .chain(self.stems.values())
            .flatten()
            .map(String::as_str)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Token to polarity (and optional subjectivity strength), MPQA style.
#[derive(Clone, Debug, Default)]
pub struct SentimentLexicon {
    pub name: String,
    exact: BTreeMap<String, SentimentEntry>,
    stems: BTreeMap<String, SentimentEntry>,
}

impl SentimentLexicon {
    pub fn new(name: impl Into<String>) -> Self {
        SentimentLexicon {
            name: name.into(),
            ..Default::default()
        }
    }

    /// Inserts an entry; a second, different polarity for the same token is
    /// rejected. Returns `Ok(false)` if the identical entry already existed.
    pub fn insert(&mut self, entry: &str, value: SentimentEntry) -> std::result::Result<bool, String> {
        let (key, stem) = split_stem(entry);
        let map = if stem { &mut self.stems } else { &mut self.exact };
        let key = key.to_lowercase();
        match map.get(&key) {
            Some(existing) if existing.polarity != value.polarity => Err(format!(
                "'{entry}' already has polarity {:?}",
                existing.polarity
            )),
            Some(existing) => {
                // Keep the stronger subjectivity annotation.
                if existing.strength != Some(Strength::Strong) && value.strength.is_some() {
                    map.insert(key, value);
                }
                Ok(false)
            }
            None => {
                map.insert(key, value);
                Ok(true)
            }
        }
    }

    /// Exact match first, then the longest matching stem.
    pub fn lookup(&self, token: &str) -> Option<SentimentEntry> {
        let token = token.to_lowercase();
        if let Some(e) = self.exact.get(&token) {
            return Some(*e);
        }
        self.stems
            .iter()
            .filter(|(stem, _)| token.starts_with(stem.as_str()))
            .max_by_key(|(stem, _)| stem.len())
            .map(|(_, e)| *e)
    }

    pub fn len(&self) -> usize {
        self.exact.len() + self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Plain set of (lowercased) entries.
#[derive(Clone, Debug, Default)]
pub struct WordList {
    pub name: String,
    words: BTreeSet<String>,
}

impl WordList {
    pub fn new(name: impl Into<String>, words: impl IntoIterator<Item = String>) -> Self {
        WordList {
            name: name.into(),
            words: words.into_iter().map(|w| w.to_lowercase()).collect(),
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(&token.to_lowercase())
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Emoticon list plus the usual western-style emoticon patterns.
#[derive(Clone, Debug)]
pub struct EmoticonList {
    entries: BTreeMap<String, Option<Polarity>>,
    pattern: Regex,
}

const EMOTICON_PATTERN: &str = concat!(
    r"^(?:",
    r"[<>]?[:;=8xX][\-o\*']?[\)\]\(\[dDpPbB/\\:\}\{@\|3sSxX]+",
    r"|[\)\]\(\[dDpP/\\\}\{@\|][\-o\*']?[:;=8][<>]?",
    r"|</?3+",
    r"|[\^T][_\.\-]?[\^T]",
    r")$"
);

impl EmoticonList {
    pub fn new(entries: BTreeMap<String, Option<Polarity>>) -> Self {
        EmoticonList {
            entries,
            pattern: Regex::new(EMOTICON_PATTERN).expect("static emoticon pattern"),
        }
    }

    /// The list shipped with the crate (about 130 entries with polarity).
    pub fn builtin() -> Self {
        match parse_lexicon("emoticons.tsv", BUILTIN_EMOTICONS, LexiconKind::Emoticon) {
            Ok(Lexicon::Emoticon(e)) => e,
            _ => unreachable!("builtin emoticon list parses"),
        }
    }

    pub fn is_emoticon(&self, s: &str) -> bool {
        if self.entries.contains_key(s) {
            return true;
        }
        // Require a non-alphanumeric character so plain words such as "xD"
        // lookalikes ("XS", "8P") are only accepted through the list.
        s.chars().count() >= 2
            && s.chars().any(|c| !c.is_alphanumeric())
            && self.pattern.is_match(s)
    }

    /// Polarity from the list's polarity column, if present.
    pub fn polarity(&self, s: &str) -> Option<Polarity> {
        self.entries.get(s).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) const BUILTIN_EMOTICONS: &str = include_str!("../../resources/emoticons.tsv");
pub(crate) const BUILTIN_TAG_QUESTIONS: &str = include_str!("../../resources/tag_questions.txt");
pub(crate) const BUILTIN_INTERJECTIONS: &str = include_str!("../../resources/interjections.txt");
pub(crate) const BUILTIN_STOPWORDS: &str = include_str!("../../resources/stopwords.txt");
pub(crate) const BUILTIN_NEGATIONS: &str = include_str!("../../resources/negations.txt");

fn split_stem(entry: &str) -> (&str, bool) {
    match entry.strip_suffix('*') {
        Some(stem) => (stem, true),
        None => (entry, false),
    }
}

fn parse_sentiment_label(label: &str) -> Option<SentimentEntry> {
    let label = label.trim().to_lowercase();
    let (strength, pol) = if let Some(rest) = label.strip_prefix("strong_") {
        (Some(Strength::Strong), rest)
    } else if let Some(rest) = label.strip_prefix("weak_") {
        (Some(Strength::Weak), rest)
    } else {
        (None, label.as_str())
    };
    Polarity::parse(pol).map(|polarity| SentimentEntry { polarity, strength })
}

pub fn load_lexicon(path: impl AsRef<Path>, kind: LexiconKind) -> Result<Lexicon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(&path.display().to_string(), &text, kind).map(|lex| {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match lex {
            Lexicon::Category(mut l) => {
                l.name = name;
                Lexicon::Category(l)
            }
            Lexicon::Sentiment(mut l) => {
                l.name = name;
                Lexicon::Sentiment(l)
            }
            Lexicon::WordList(mut l) => {
                l.name = name;
                Lexicon::WordList(l)
            }
            other => other,
        }
    })
}

/// Parses lexicon text; `source` is only used in error messages.
pub fn parse_lexicon(source: &str, text: &str, kind: LexiconKind) -> Result<Lexicon> {
    let mut category = CategoryLexicon::new(source);
    let mut sentiment = SentimentLexicon::new(source);
    let mut words = BTreeSet::new();
    let mut emoticons = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() > 2 {
            return Err(Error::parse(
                source,
                line_no,
                format!("expected at most 2 tab-separated columns, found {}", cols.len()),
            ));
        }
        let token = cols[0].trim();
        if token.is_empty() || token == "*" {
            return Err(Error::parse(source, line_no, "empty entry"));
        }
        let label = cols.get(1).map(|s| s.trim());
        match kind {
            LexiconKind::Category => {
                let labels = label
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| Error::parse(source, line_no, "missing category label"))?;
                for cat in labels.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                    category.insert(token, cat);
                }
            }
            LexiconKind::Sentiment => {
                let label =
                    label.ok_or_else(|| Error::parse(source, line_no, "missing polarity label"))?;
                let entry = parse_sentiment_label(label).ok_or_else(|| {
                    Error::parse(source, line_no, format!("unknown polarity label '{label}'"))
                })?;
                sentiment
                    .insert(token, entry)
                    .map_err(|msg| Error::parse(source, line_no, msg))?;
            }
            LexiconKind::WordList => {
                if label.is_some() {
                    return Err(Error::parse(source, line_no, "word lists take one column"));
                }
                words.insert(token.to_lowercase());
            }
            LexiconKind::Emoticon => {
                let pol = match label {
                    None | Some("") => None,
                    Some(l) => Some(Polarity::parse(&l.to_lowercase()).ok_or_else(|| {
                        Error::parse(source, line_no, format!("unknown polarity '{l}'"))
                    })?),
                };
                emoticons.insert(token.to_string(), pol);
            }
        }
    }

    Ok(match kind {
        LexiconKind::Category => Lexicon::Category(category),
        LexiconKind::Sentiment => Lexicon::Sentiment(sentiment),
        LexiconKind::WordList => Lexicon::WordList(WordList {
            name: source.to_string(),
            words,
        }),
        LexiconKind::Emoticon => Lexicon::Emoticon(EmoticonList::new(emoticons)),
    })
}

pub(crate) fn builtin_word_list(name: &str, text: &str) -> WordList {
    match parse_lexicon(name, text, LexiconKind::WordList) {
        Ok(Lexicon::WordList(mut w)) => {
            w.name = name.to_string();
            w
        }
        _ => unreachable!("builtin word list {name} parses"),
    }
}
