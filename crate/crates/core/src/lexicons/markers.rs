use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicons::{LexiconSet, Polarity, Strength};
use crate::text::{is_all_caps_word, Turn};

/// Single/multiple use of one punctuation mark. The two flags are mutually
/// exclusive: any run of two or more sets `multiple` and clears `single`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkUse {
    pub single: bool,
    pub multiple: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PunctuationFeatures {
    pub question: MarkUse,
    pub period: MarkUse,
    pub semicolon: MarkUse,
    /// Two or more distinct marks adjacent, e.g. `?!`.
    pub mixed: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmoticonPolarity {
    #[default]
    None,
    Positive,
    Negative,
    Neutral,
    Mixed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerFeatures {
    pub hyperbole: bool,
    pub single_exclamation: bool,
    pub multi_exclamation: bool,
    pub tag_question: bool,
    pub interjection: bool,
    pub capitalization: bool,
    pub quotation: bool,
    pub emoticon_present: bool,
    pub emoticon_polarity: EmoticonPolarity,
    pub punctuation: PunctuationFeatures,
}

impl MarkerFeatures {
    /// Flattened `(name, value)` pairs for feature vectors.
    pub fn named_values(&self) -> Vec<(String, f64)> {
        let b = |v: bool| if v { 1.0 } else { 0.0 };
        let p = &self.punctuation;
        let mut out = vec![
            ("hyperbole", b(self.hyperbole)),
            ("single_exclamation", b(self.single_exclamation)),
            ("multi_exclamation", b(self.multi_exclamation)),
            ("tag_question", b(self.tag_question)),
            ("interjection", b(self.interjection)),
            ("capitalization", b(self.capitalization)),
            ("quotation", b(self.quotation)),
            ("emoticon", b(self.emoticon_present)),
            ("question_single", b(p.question.single)),
            ("question_multiple", b(p.question.multiple)),
            ("period_single", b(p.period.single)),
            ("period_multiple", b(p.period.multiple)),
            ("semicolon_single", b(p.semicolon.single)),
            ("semicolon_multiple", b(p.semicolon.multiple)),
            ("punct_mixed", b(p.mixed)),
        ]
        .into_iter()
        .map(|(n, v)| (n.to_string(), v))
        .collect::<Vec<_>>();
        let pol = match self.emoticon_polarity {
            EmoticonPolarity::None => None,
            EmoticonPolarity::Positive => Some("positive"),
            EmoticonPolarity::Negative => Some("negative"),
            EmoticonPolarity::Neutral => Some("neutral"),
            EmoticonPolarity::Mixed => Some("mixed"),
        };
        if let Some(pol) = pol {
            out.push((format!("emoticon_{pol}"), 1.0));
        }
        out
    }
}

const MARKS: &[char] = &['!', '?', '.', ';'];

pub(crate) fn is_punct_run(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| MARKS.contains(&c))
}

/// Lengths of maximal runs of `mark` inside `token`.
fn runs_of(token: &str, mark: char) -> impl Iterator<Item = usize> + '_ {
    let mut runs = Vec::new();
    let mut current = 0;
    for c in token.chars() {
        if c == mark {
            current += 1;
        } else if current > 0 {
            runs.push(current);
            current = 0;
        }
    }
    if current > 0 {
        runs.push(current);
    }
    runs.into_iter()
}

fn mark_use(tokens: &[&str], mark: char) -> MarkUse {
    let mut any = false;
    let mut multiple = false;
    for t in tokens.iter().filter(|t| is_punct_run(t)) {
        for run in runs_of(t, mark) {
            any = true;
            multiple |= run >= 2;
        }
    }
    MarkUse {
        single: any && !multiple,
        multiple,
    }
}

const QUOTES: &[&str] = &["\"", "'", "``", "''"];

fn has_quotation(tokens: &[&str]) -> bool {
    let straight = tokens.iter().filter(|t| QUOTES.contains(t)).count() >= 2;
    let curly_double = tokens.contains(&"\u{201c}") && tokens.contains(&"\u{201d}");
    let curly_single = tokens.contains(&"\u{2018}") && tokens.contains(&"\u{2019}");
    straight || curly_double || curly_single
}

/// Detects the sarcasm markers of a tokenized turn.
///
/// Needs at least one sentiment lexicon (hyperbole comes from strong
/// subjectivity entries) and an interjection list.
pub fn detect_markers(turn: &Turn, lexicons: &LexiconSet) -> Result<MarkerFeatures> {
    if lexicons.sentiment.is_empty() {
        return Err(Error::Config(
            "marker detection needs a sentiment lexicon with subjectivity strength".into(),
        ));
    }
    let interjections = lexicons
        .interjections
        .as_ref()
        .ok_or_else(|| Error::Config("marker detection needs an interjection list".into()))?;

    let tokens: Vec<&str> = turn.tokens().collect();
    let mut m = MarkerFeatures {
        hyperbole: tokens.iter().any(|t| {
            lexicons
                .sentiment
                .iter()
                .any(|lex| lex.lookup(t).is_some_and(|e| e.strength == Some(Strength::Strong)))
        }),
        interjection: tokens.iter().any(|t| interjections.contains(t)),
        capitalization: tokens.iter().any(|t| is_all_caps_word(t)),
        quotation: has_quotation(&tokens),
        ..Default::default()
    };

    let excl = mark_use(&tokens, '!');
    m.single_exclamation = excl.single;
    m.multi_exclamation = excl.multiple;
    m.punctuation = PunctuationFeatures {
        question: mark_use(&tokens, '?'),
        period: mark_use(&tokens, '.'),
        semicolon: mark_use(&tokens, ';'),
        mixed: tokens.iter().any(|t| {
            is_punct_run(t) && {
                let mut distinct: Vec<char> = t.chars().collect();
                distinct.sort_unstable();
                distinct.dedup();
                distinct.len() >= 2
            }
        }),
    };

    m.tag_question = turn.sentences.iter().any(|sent| match sent.split_last() {
        Some((last, body)) if is_punct_run(last) && last.contains('?') => {
            lexicons.tag_questions.ends_with_phrase(body)
        }
        _ => false,
    });

    let mut polarities = Vec::new();
    for t in tokens.iter().filter(|t| lexicons.emoticons.is_emoticon(t)) {
        m.emoticon_present = true;
        let pol = lexicons
            .emoticons
            .polarity(t)
            .or_else(|| lexicons.sentiment_of(t).map(|e| e.polarity))
            .unwrap_or(Polarity::Neutral);
        polarities.push(pol);
    }
    polarities.sort();
    polarities.dedup();
    m.emoticon_polarity = match polarities.as_slice() {
        [] => EmoticonPolarity::None,
        [Polarity::Positive] => EmoticonPolarity::Positive,
        [Polarity::Negative] => EmoticonPolarity::Negative,
        [Polarity::Neutral] => EmoticonPolarity::Neutral,
        _ => EmoticonPolarity::Mixed,
    };
    Ok(m)
}
