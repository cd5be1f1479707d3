//! Lexical resources and sarcasm-marker detection.
//!
//! Proprietary resources (LIWC, MPQA, WordNet-Affect, opinion lexicons) are
//! not shipped; they are read from user-supplied files in the formats of
//! [`load_lexicon`]. The emoticon list, tag questions, interjections,
//! negations and stop words have built-in defaults.

mod load;
mod markers;

use std::path::Path;

pub use load::{
    load_lexicon, parse_lexicon, CategoryLexicon, EmoticonList, Lexicon, LexiconKind, Polarity,
    SentimentEntry, SentimentLexicon, Strength, WordList,
};
pub use markers::{detect_markers, EmoticonPolarity, MarkUse, MarkerFeatures, PunctuationFeatures};

use crate::error::{Error, Result};
use load::{
    builtin_word_list, BUILTIN_INTERJECTIONS, BUILTIN_NEGATIONS, BUILTIN_STOPWORDS,
    BUILTIN_TAG_QUESTIONS,
};

/// Tag-question phrases, stored tokenized and lowercased.
#[derive(Clone, Debug, Default)]
pub struct TagQuestions {
    phrases: Vec<Vec<String>>,
}

impl TagQuestions {
    pub fn from_list(list: &WordList) -> Self {
        let mut phrases: Vec<Vec<String>> = list
            .iter()
            .map(|p| p.split_whitespace().map(str::to_lowercase).collect())
            .filter(|p: &Vec<String>| !p.is_empty())
            .collect();
        phrases.sort();
        TagQuestions { phrases }
    }

    pub fn builtin() -> Self {
        Self::from_list(&builtin_word_list("tag_questions", BUILTIN_TAG_QUESTIONS))
    }

    /// True if `tokens` (lowercased) end with one of the phrases.
    pub fn ends_with_phrase(&self, tokens: &[String]) -> bool {
        self.phrases.iter().any(|p| {
            p.len() <= tokens.len()
                && tokens[tokens.len() - p.len()..]
                    .iter()
                    .zip(p)
                    .all(|(t, w)| t.to_lowercase() == *w)
        })
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

/// Everything the discrete features and marker detectors read.
#[derive(Clone, Debug)]
pub struct LexiconSet {
    pub categories: Vec<CategoryLexicon>,
    pub sentiment: Vec<SentimentLexicon>,
    pub interjections: Option<WordList>,
    pub tag_questions: TagQuestions,
    pub emoticons: EmoticonList,
    pub negations: WordList,
    pub stop_words: WordList,
}

impl Default for LexiconSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl LexiconSet {
    /// Built-in lists only; no category or sentiment lexicons.
    pub fn builtin() -> Self {
        LexiconSet {
            categories: Vec::new(),
            sentiment: Vec::new(),
            interjections: Some(builtin_word_list("interjections", BUILTIN_INTERJECTIONS)),
            tag_questions: TagQuestions::builtin(),
            emoticons: EmoticonList::builtin(),
            negations: builtin_word_list("negations", BUILTIN_NEGATIONS),
            stop_words: builtin_word_list("stopwords", BUILTIN_STOPWORDS),
        }
    }

    /// Loads a lexicon directory:
    ///
    /// ```text
    /// category/*.tsv        category lexicons, named by file stem
    /// sentiment/*.tsv       sentiment lexicons, named by file stem
    /// interjections.txt     optional overrides of the built-in lists
    /// tag_questions.txt
    /// emoticons.tsv
    /// negations.txt
    /// stopwords.txt
    /// ```
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "lexicon directory {} does not exist",
                dir.display()
            )));
        }
        let mut set = Self::builtin();
        for path in sorted_tsv(&dir.join("category"))? {
            if let Lexicon::Category(c) = load_lexicon(&path, LexiconKind::Category)? {
                set.categories.push(c);
            }
        }
        for path in sorted_tsv(&dir.join("sentiment"))? {
            if let Lexicon::Sentiment(s) = load_lexicon(&path, LexiconKind::Sentiment)? {
                set.sentiment.push(s);
            }
        }
        let word_list = |name: &str| -> Result<Option<WordList>> {
            let p = dir.join(name);
            if !p.exists() {
                return Ok(None);
            }
            match load_lexicon(&p, LexiconKind::WordList)? {
                Lexicon::WordList(w) => Ok(Some(w)),
                _ => unreachable!(),
            }
        };
        if let Some(w) = word_list("interjections.txt")? {
            set.interjections = Some(w);
        }
        if let Some(w) = word_list("tag_questions.txt")? {
            set.tag_questions = TagQuestions::from_list(&w);
        }
        if let Some(w) = word_list("negations.txt")? {
            set.negations = w;
        }
        if let Some(w) = word_list("stopwords.txt")? {
            set.stop_words = w;
        }
        let emo = dir.join("emoticons.tsv");
        if emo.exists() {
            if let Lexicon::Emoticon(e) = load_lexicon(&emo, LexiconKind::Emoticon)? {
                set.emoticons = e;
            }
        }
        Ok(set)
    }

    /// Polarity of a token from the first sentiment lexicon that lists it.
    pub fn sentiment_of(&self, token: &str) -> Option<SentimentEntry> {
        self.sentiment.iter().find_map(|lex| lex.lookup(token))
    }
}

fn sorted_tsv(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    out.sort();
    Ok(out)
}
