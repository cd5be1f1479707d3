use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Vocabulary, PAD_ID};
use crate::error::{Error, Result};
use crate::nn::{Matrix, Rng};

pub const OOV_RANGE: f64 = 0.05;

/// How rows absent from the pre-trained file were filled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OovPolicy {
    pub low: f64,
    pub high: f64,
    pub seed: u64,
    pub found: usize,
    pub oov: usize,
}

/// One row per vocabulary id.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: Matrix,
    pub oov: OovPolicy,
}

impl EmbeddingTable {
    /// All non-padding rows seeded-uniform in (-0.05, 0.05).
    pub fn random(vocab: &Vocabulary, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dim must be positive".into()));
        }
        let mut vectors = Matrix::zeros(vocab.len(), dim);
        let mut rng = Rng::new(seed);
        for id in 0..vocab.len() {
            if id as u32 == PAD_ID {
                continue;
            }
            for x in vectors.row_mut(id) {
                *x = rng.uniform(-OOV_RANGE, OOV_RANGE);
            }
        }
        Ok(EmbeddingTable {
            dim,
            vectors,
            oov: OovPolicy {
                low: -OOV_RANGE,
                high: OOV_RANGE,
                seed,
                found: 0,
                oov: vocab.len().saturating_sub(1),
            },
        })
    }

    pub fn row(&self, id: u32) -> &[f64] {
        self.vectors.row(id as usize)
    }
}

/// Reads a textual word-vector file (`count dim` header, then
/// `token v1 … vdim` lines). Tokens in the file are copied verbatim; other
/// non-padding ids are drawn uniform(-0.05, 0.05) in id order.
pub fn load_embeddings(path: impl AsRef<Path>, vocab: &Vocabulary, seed: u64) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&path.display().to_string(), &text, vocab, seed)
}

pub(crate) fn parse_embeddings(src: &str, text: &str, vocab: &Vocabulary, seed: u64) -> Result<EmbeddingTable> {
    let mut lines = text.lines().enumerate();
    let (count, dim) = match lines.next() {
        Some((_, header)) => {
            let parts: Vec<&str> = header.split_whitespace().collect();
            match parts.as_slice() {
                [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
                    (Ok(c), Ok(d)) if d > 0 => (c, d),
                    _ => return Err(Error::parse(src, 1, "header must be \"count dim\"")),
                },
                _ => return Err(Error::parse(src, 1, "header must be \"count dim\"")),
            }
        }
        None => return Err(Error::parse(src, 1, "empty embedding file")),
    };

    let mut vectors = Matrix::zeros(vocab.len(), dim);
    let mut found = vec![false; vocab.len()];
    let mut rows = 0;
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        let mut parts = line.split_whitespace();
        let token = parts.next().unwrap_or_default();
        let values = parts
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::parse(src, lineno, format!("bad value '{v}'")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::parse(
                src,
                lineno,
                format!("expected {dim} values, found {}", values.len()),
            ));
        }
        if let Some(id) = vocab.get(token) {
            if id != PAD_ID {
                vectors.row_mut(id as usize).copy_from_slice(&values);
                found[id as usize] = true;
            }
        }
    }
    if rows != count {
        log::warn!("{src}: header says {count} vectors, file has {rows}");
    }

    let mut rng = Rng::new(seed);
    let mut oov = 0;
    for (id, hit) in found.iter().enumerate() {
        if *hit || id as u32 == PAD_ID {
            continue;
        }
        oov += 1;
        for x in vectors.row_mut(id) {
            *x = rng.uniform(-OOV_RANGE, OOV_RANGE);
        }
    }
    Ok(EmbeddingTable {
        dim,
        vectors,
        oov: OovPolicy {
            low: -OOV_RANGE,
            high: OOV_RANGE,
            seed,
            found: found.iter().filter(|f| **f).count(),
            oov,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::build(vec![vec!["love", "hate", "zebra"]], 1)
    }

    #[test]
    fn in_file_rows_copied_exactly() {
        let v = vocab();
        let text = "2 3\nlove 0.1 -0.25 3.5\nhate 1e-3 0 2\n";
        let e = parse_embeddings("t", text, &v, 7).unwrap();
        assert_eq!(e.row(v.id("love")), &[0.1, -0.25, 3.5]);
        assert_eq!(e.row(PAD_ID), &[0.0, 0.0, 0.0]);
        assert_eq!(e.oov.found, 2);
    }

    #[test]
    fn oov_rows_seeded_uniform() {
        let v = vocab();
        let text = "1 4\nlove 1 2 3 4\n";
        let a = parse_embeddings("t", text, &v, 11).unwrap();
        let b = parse_embeddings("t", text, &v, 11).unwrap();
        let c = parse_embeddings("t", text, &v, 12).unwrap();
        let z = v.id("zebra");
        assert_eq!(a.row(z), b.row(z));
        assert_ne!(a.row(z), c.row(z));
        assert!(a.row(z).iter().all(|x| x.abs() < 0.05));
    }

    #[test]
    fn short_line_is_parse_error_at_that_line() {
        let v = vocab();
        let mut text = String::from("2 300\n");
        text.push_str("love");
        for _ in 0..300 {
            text.push_str(" 0.5");
        }
        text.push_str("\nhate");
        for _ in 0..299 {
            text.push_str(" 0.5");
        }
        text.push('\n');
        match parse_embeddings("emb.txt", &text, &v, 0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_header_and_bad_float() {
        let v = vocab();
        assert!(matches!(
            parse_embeddings("t", "three 2\n", &v, 0),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_embeddings("t", "1 2\nlove 0.1 abc\n", &v, 0),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn random_table_pads_with_zero() {
        let v = vocab();
        let e = EmbeddingTable::random(&v, 5, 3).unwrap();
        assert_eq!(e.row(PAD_ID), &[0.0; 5]);
        assert!(e.row(3).iter().all(|x| x.abs() < 0.05 && *x != 0.0));
    }
}
