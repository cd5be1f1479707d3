//! Input resolution, split files, hashing and output helpers.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sarc_core::model::Checkpoint;
use sarc_core::text::{ConversationInstance, PrepConfig, Vocabulary};
use sarc_core::train::Splits;
use sarc_core::Error;

use crate::{data_error, CliError, CliResult, DataArgs, Part};

pub const DATA_DIR_ENV: &str = "SARC_DATA_DIR";
pub const DEFAULT_DATA_FILE: &str = "data.jsonl";
pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const VOCAB_FILE: &str = "vocab.tsv";

/// Relative input paths resolve against `$SARC_DATA_DIR` when it is set.
pub fn resolve_input(path: &Path) -> PathBuf {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(root) if path.is_relative() => Path::new(&root).join(path),
        _ => path.to_path_buf(),
    }
}

/// `--data`, or `$SARC_DATA_DIR/data.jsonl` when the flag is absent.
pub fn data_path(args: &DataArgs) -> CliResult<PathBuf> {
    match (&args.data, std::env::var_os(DATA_DIR_ENV)) {
        (Some(p), _) => Ok(resolve_input(p)),
        (None, Some(root)) => Ok(Path::new(&root).join(DEFAULT_DATA_FILE)),
        (None, None) => Err(CliError::Usage(format!("--data is required when {DATA_DIR_ENV} is not set"))),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Hash over every file below `dir`: sorted relative paths with their
/// content hashes, so renaming or editing any file changes it.
pub fn sha256_dir(dir: &Path) -> CliResult<String> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) -> CliResult<()> {
        for entry in std::fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
            let path = entry.map_err(|e| io_err(dir, e))?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
                out.push((rel, sha256_file(&path)?));
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    files.sort();
    let listing: String = files.iter().map(|(p, h)| format!("{p}\t{h}\n")).collect();
    Ok(sha256_hex(listing.as_bytes()))
}

pub fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Core(Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| data_error(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_bytes(path, &json_bytes(value)?)
}

/// One compact JSON object per line, to `path` or `stdout`.
pub fn write_jsonl<T: Serialize>(path: Option<&Path>, rows: &[T], stdout: &mut dyn Write) -> CliResult<()> {
    let mut buf = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut buf, r).map_err(|e| data_error(e.to_string()))?;
        buf.push(b'\n');
    }
    match path {
        Some(p) => write_bytes(p, &buf),
        None => write_stdout(stdout, &buf),
    }
}

/// Writes to the primary output stream; a reader that went away (e.g.
/// `| head`) is not an error.
pub fn write_stdout(stdout: &mut dyn Write, bytes: &[u8]) -> CliResult<()> {
    match stdout.write_all(bytes) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(io_err(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

/// Split membership by instance id, the on-disk form of [`Splits`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitIds {
    pub train: Vec<String>,
    #[serde(default)]
    pub dev: Vec<String>,
    #[serde(default)]
    pub test: Vec<String>,
}

impl SplitIds {
    pub fn from_splits(splits: &Splits, data: &[ConversationInstance]) -> Self {
        let ids = |idx: &[usize]| idx.iter().map(|&i| data[i].id.clone()).collect();
        SplitIds {
            train: ids(&splits.train),
            dev: ids(&splits.dev),
            test: ids(&splits.test),
        }
    }

    /// Indices into `data`. Unknown ids and ids listed twice are errors;
    /// instances not listed anywhere are left out.
    pub fn to_splits(&self, data: &[ConversationInstance]) -> CliResult<Splits> {
        let index: BTreeMap<&str, usize> = data.iter().enumerate().map(|(i, d)| (d.id.as_str(), i)).collect();
        let mut seen = HashSet::new();
        let mut part = |ids: &[String]| -> CliResult<Vec<usize>> {
            let mut out = Vec::with_capacity(ids.len());
            for id in ids {
                let &i = index
                    .get(id.as_str())
                    .ok_or_else(|| data_error(format!("split lists unknown instance '{id}'")))?;
                if !seen.insert(i) {
                    return Err(data_error(format!("instance '{id}' appears in more than one split slot")));
                }
                out.push(i);
            }
            out.sort_unstable();
            Ok(out)
        };
        Ok(Splits {
            train: part(&self.train)?,
            dev: part(&self.dev)?,
            test: part(&self.test)?,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Core(Error::Data(format!("{}: {e}", path.display()))))
    }
}

/// Indices of `part`. `None` means the whole dataset when no splits were
/// given and the test split otherwise.
pub fn part_indices(splits: Option<&Splits>, part: Option<Part>, n: usize) -> CliResult<Vec<usize>> {
    let part = part.unwrap_or(if splits.is_some() { Part::Test } else { Part::All });
    match (part, splits) {
        (Part::All, _) => Ok((0..n).collect()),
        (_, None) => Err(CliError::Usage("--part needs --splits".into())),
        (Part::Train, Some(s)) => Ok(s.train.clone()),
        (Part::Dev, Some(s)) => Ok(s.dev.clone()),
        (Part::Test, Some(s)) => Ok(s.test.clone()),
    }
}

/// A trained model directory: checkpoint, its vocabulary and the
/// preprocessing caps it was trained with.
pub struct ModelDir {
    pub checkpoint: Checkpoint,
    pub vocab: Vocabulary,
    pub prep: PrepConfig,
}

impl ModelDir {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let checkpoint = Checkpoint::load(&dir.join(CHECKPOINT_FILE))?;
        let vocab = Vocabulary::load(dir.join(VOCAB_FILE))?;
        if vocab.hash() != checkpoint.vocab_hash {
            return Err(CliError::Core(Error::Checkpoint(format!(
                "vocabulary in {} does not match the checkpoint",
                dir.display()
            ))));
        }
        let prep = match checkpoint.meta.get("prep") {
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| CliError::Core(Error::Checkpoint(format!("bad prep settings in checkpoint: {e}"))))?,
            None => PrepConfig::default(),
        };
        Ok(ModelDir { checkpoint, vocab, prep })
    }
}
