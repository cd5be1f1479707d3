use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;
/// Separates turns when several turns are read by one LSTM.
pub const BOUNDARY_ID: u32 = 2;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
pub const BOUNDARY_TOKEN: &str = "<turn>";

const RESERVED: [&str; 3] = [PAD_TOKEN, UNK_TOKEN, BOUNDARY_TOKEN];

/// Token/id map with reserved padding, unknown and turn-boundary ids.
/// Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<usize>,
    index: HashMap<String, u32>,
    min_count: usize,
}

impl Vocabulary {
    /// Keeps every token with corpus frequency `>= min_count`. Ids are
    /// assigned by descending frequency, ties broken lexicographically.
    pub fn build<'a, I, S>(sentences: I, min_count: usize) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a str>,
    {
        let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
        for sent in sentences {
            for tok in sent {
                *freq.entry(tok).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> = freq
            .into_iter()
            .filter(|(t, c)| *c >= min_count.max(1) && !RESERVED.contains(t))
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut v = Vocabulary::reserved_only(min_count);
        for (tok, count) in kept {
            v.push(tok.to_string(), count);
        }
        v
    }

    fn reserved_only(min_count: usize) -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            counts: Vec::new(),
            index: HashMap::new(),
            min_count,
        };
        for r in RESERVED {
            v.push(r.to_string(), 0);
        }
        v
    }

    fn push(&mut self, token: String, count: usize) {
        let id = self.tokens.len() as u32;
        self.index.insert(token.clone(), id);
        self.tokens.push(token);
        self.counts.push(count);
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= RESERVED.len()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    /// Id of `token`, or [`UNK_ID`].
    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: u32) -> usize {
        self.counts.get(id as usize).copied().unwrap_or(0)
    }

    pub fn tokens(&self) -> impl Iterator<Item = (u32, &str)> {
        self.tokens.iter().enumerate().map(|(i, t)| (i as u32, t.as_str()))
    }

    /// SHA-256 over the id-ordered token list.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// One `token<TAB>count` line per id; the first line carries min_count.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = format!("#min_count\t{}\n", self.min_count);
        for (t, c) in self.tokens.iter().zip(&self.counts) {
            out.push_str(&format!("{t}\t{c}\n"));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let src = path.display().to_string();
        let mut lines = text.lines().enumerate();
        let min_count = match lines.next() {
            Some((_, l)) => l
                .strip_prefix("#min_count\t")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(&src, 1, "missing #min_count header"))?,
            None => return Err(Error::parse(&src, 1, "empty vocabulary file")),
        };
        let mut v = Vocabulary {
            tokens: Vec::new(),
            counts: Vec::new(),
            index: HashMap::new(),
            min_count,
        };
        for (i, line) in lines {
            let (tok, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(&src, i + 1, "expected token<TAB>count"))?;
            let count = count
                .parse()
                .map_err(|_| Error::parse(&src, i + 1, format!("bad count '{count}'")))?;
            if v.index.contains_key(tok) {
                return Err(Error::parse(&src, i + 1, format!("duplicate token '{tok}'")));
            }
            v.push(tok.to_string(), count);
        }
        if v.tokens.len() < RESERVED.len()
            || v.tokens.iter().zip(RESERVED).any(|(t, r)| t != r)
        {
            return Err(Error::parse(&src, 2, "reserved tokens missing or out of order"));
        }
        Ok(v)
    }
}
