//! Rule-based sentence splitting and tokenization for tweets and forum
//! posts.

use std::sync::OnceLock;

use regex::Regex;

use crate::error::{Error, Result};
use crate::lexicons::EmoticonList;

const TERMINATORS: &[char] = &['.', '!', '?'];
const PUNCT_RUN: &[char] = &['.', '!', '?', ';'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(?i:https?://|www\.)\S+$").expect("static url pattern"))
}

pub(crate) fn is_url(chunk: &str) -> bool {
    url_regex().is_match(chunk)
}

/// Splits raw text into sentences.
///
/// A sentence ends after a whitespace-delimited chunk whose last character
/// (ignoring closing quotes/brackets) is `.`, `!` or `?`. URL chunks never
/// end a sentence. Terminators stay with their sentence.
pub fn split_sentences(raw_text: &str) -> Result<Vec<String>> {
    if raw_text.trim().is_empty() {
        return Err(Error::Empty("text to split into sentences"));
    }
    let mut sentences = Vec::new();
    let mut start: Option<usize> = None;
    let mut chunk_start: Option<usize> = None;

    let close = |s: usize, e: usize, out: &mut Vec<String>| {
        let sent = raw_text[s..e].trim();
        if !sent.is_empty() {
            out.push(sent.to_string());
        }
    };

    let bytes_end = raw_text.len();
    let mut iter = raw_text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if c.is_whitespace() {
            continue;
        }
        if start.is_none() {
            start = Some(i);
        }
        if chunk_start.is_none() {
            chunk_start = Some(i);
        }
        let at_chunk_end = match iter.peek() {
            None => true,
            Some((_, n)) => n.is_whitespace(),
        };
        if at_chunk_end {
            let cs = chunk_start.take().unwrap();
            let end = iter.peek().map(|(j, _)| *j).unwrap_or(bytes_end);
            let chunk = &raw_text[cs..end];
            let core = chunk.trim_end_matches(CLOSERS);
            let terminal = !is_url(chunk) && core.ends_with(TERMINATORS);
            if terminal {
                close(start.take().unwrap(), end, &mut sentences);
            }
        }
    }
    if let Some(s) = start {
        close(s, bytes_end, &mut sentences);
    }
    Ok(sentences)
}

/// True for tokens whose letters are all uppercase and that have at least
/// two of them (`GREAT`, `SO`, `DON'T`); digits or other symbols disqualify.
pub fn is_all_caps_word(token: &str) -> bool {
    let mut letters = 0;
    for c in token.chars() {
        if c.is_alphabetic() {
            if !c.is_uppercase() {
                return false;
            }
            letters += 1;
        } else if c != '\'' && c != '\u{2019}' && c != '-' {
            return false;
        }
    }
    letters >= 2
}

/// Lowercases a token unless it is an all-caps word.
pub fn apply_casing(token: &str) -> String {
    if is_all_caps_word(token) {
        token.to_string()
    } else {
        token.to_lowercase()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Whitespace-and-punctuation tokenizer that keeps hashtags, @mentions,
/// URLs, emoticons and punctuation runs (`!!!`, `?!`) as single tokens.
/// Contractions (`i'm`, `didn't`) stay whole.
#[derive(Clone, Debug)]
pub struct Tokenizer {
    emoticons: EmoticonList,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::new(EmoticonList::builtin())
    }
}

impl Tokenizer {
    pub fn new(emoticons: EmoticonList) -> Self {
        Tokenizer { emoticons }
    }

    pub fn emoticons(&self) -> &EmoticonList {
        &self.emoticons
    }

    pub fn tokenize(&self, sentence: &str) -> Vec<String> {
        let mut out = Vec::new();
        for chunk in sentence.split_whitespace() {
            self.tokenize_chunk(chunk, &mut out);
        }
        out
    }

    fn tokenize_chunk(&self, chunk: &str, out: &mut Vec<String>) {
        if self.emoticons.is_emoticon(chunk) {
            out.push(chunk.to_string());
            return;
        }
        if is_url(chunk) {
            let url = chunk.trim_end_matches(|c: char| ".,!?;:\"')".contains(c));
            out.push(url.to_string());
            if url.len() < chunk.len() {
                self.tokenize_chunk(&chunk[url.len()..], out);
            }
            return;
        }

        let chars: Vec<(usize, char)> = chunk.char_indices().collect();
        let byte_at = |k: usize| chars.get(k).map(|(b, _)| *b).unwrap_or(chunk.len());
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k].1;
            if is_word_char(c) {
                let begin = k;
                k += 1;
                while k < chars.len() {
                    let ch = chars[k].1;
                    let joiner = matches!(ch, '\'' | '\u{2019}' | '-')
                        && chars.get(k + 1).is_some_and(|(_, n)| n.is_alphanumeric());
                    if is_word_char(ch) {
                        k += 1;
                    } else if joiner {
                        k += 2;
                    } else {
                        break;
                    }
                }
                out.push(apply_casing(&chunk[byte_at(begin)..byte_at(k)]));
                continue;
            }

            let rest = &chunk[byte_at(k)..];
            if self.emoticons.is_emoticon(rest) {
                out.push(rest.to_string());
                return;
            }
            if (c == '#' || c == '@') && chars.get(k + 1).is_some_and(|(_, n)| is_word_char(*n)) {
                let begin = k;
                k += 1;
                while k < chars.len() && is_word_char(chars[k].1) {
                    k += 1;
                }
                out.push(chunk[byte_at(begin)..byte_at(k)].to_lowercase());
                continue;
            }
            if PUNCT_RUN.contains(&c) {
                let begin = k;
                while k < chars.len() && PUNCT_RUN.contains(&chars[k].1) {
                    k += 1;
                }
                out.push(chunk[byte_at(begin)..byte_at(k)].to_string());
                continue;
            }
            out.push(c.to_string());
            k += 1;
        }
    }
}

fn default_tokenizer() -> &'static Tokenizer {
    static TOK: OnceLock<Tokenizer> = OnceLock::new();
    TOK.get_or_init(Tokenizer::default)
}

/// Tokenizes with the built-in emoticon list.
pub fn tokenize(sentence: &str) -> Vec<String> {
    default_tokenizer().tokenize(sentence)
}
