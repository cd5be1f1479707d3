use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::nn::{Matrix, ParamSet};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SARCCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    vocab_hash: String,
    meta: serde_json::Value,
}

/// Binary container:
///
/// ```text
/// magic "SARCCKPT" | u32 version | u64 len | JSON header
/// u64 count | { u32 len | name | u64 rows | u64 cols | rows·cols f64 }*
/// ```
///
/// Integers and floats are little-endian.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub vocab_hash: String,
    /// Free-form settings saved alongside (preprocessing caps, hyperparameters).
    pub meta: serde_json::Value,
    pub params: ModelParams,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("length overflows usize".into()))
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&Header {
            config: self.config.clone(),
            vocab_hash: self.vocab_hash.clone(),
            meta: self.meta.clone(),
        })
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
        let mut out = Vec::new();
        out.extend_from_slice(CHECKPOINT_MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(&header);
        let blocks = self.params.blocks();
        out.extend_from_slice(&(blocks.len() as u64).to_le_bytes());
        for (name, m) in blocks {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            let (r, c) = m.shape();
            out.extend_from_slice(&(r as u64).to_le_bytes());
            out.extend_from_slice(&(c as u64).to_le_bytes());
            for v in m.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(8)? != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
        }
        let hlen = r.len()?;
        let header: Header =
            serde_json::from_slice(r.take(hlen)?).map_err(|e| Error::Checkpoint(format!("header: {e}")))?;
        let count = r.len()?;
        let mut arrays = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let nlen = r.u32()? as usize;
            let name = String::from_utf8(r.take(nlen)?.to_vec())
                .map_err(|_| Error::Checkpoint("array name is not UTF-8".into()))?;
            let (rows, cols) = (r.len()?, r.len()?);
            let n = rows
                .checked_mul(cols)
                .ok_or_else(|| Error::Checkpoint(format!("array '{name}' too large")))?;
            let bytes = r.take(n.checked_mul(8).ok_or_else(|| Error::Checkpoint("array too large".into()))?)?;
            let data = bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            arrays.push((name, Matrix::new(rows, cols, data)?));
        }
        if r.pos != buf.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", buf.len() - r.pos)));
        }
        let vocab = arrays
            .iter()
            .find(|(n, _)| n == "embeddings")
            .map(|(_, m)| m.rows())
            .ok_or_else(|| Error::Checkpoint("missing array 'embeddings'".into()))?;
        let mut params = ModelParams::init(&header.config, vocab, None, 0)?;
        {
            let mut slots = params.blocks_mut();
            if slots.len() != arrays.len() {
                return Err(Error::Checkpoint(format!(
                    "expected {} arrays for {}, found {}",
                    slots.len(),
                    header.config,
                    arrays.len()
                )));
            }
            for ((want, dst), (name, src)) in slots.iter_mut().zip(arrays) {
                if *want != name || dst.shape() != src.shape() {
                    return Err(Error::Checkpoint(format!(
                        "array '{name}' {:?} does not match expected '{want}' {:?}",
                        src.shape(),
                        dst.shape()
                    )));
                }
                **dst = src;
            }
        }
        Ok(Checkpoint {
            config: header.config,
            vocab_hash: header.vocab_hash,
            meta: header.meta,
            params,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&buf)
    }
}
