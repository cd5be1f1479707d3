use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TurnRole;

/// Sentence attention of one turn, ready for inspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapEntry {
    pub instance_id: String,
    pub role: TurnRole,
    pub sentences: Vec<String>,
    pub weights: Vec<f64>,
    /// Annotator votes per sentence, when annotations were supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<Vec<usize>>,
}

/// One bar per sentence, `width` characters at weight 1.
pub fn render_bars(entry: &HeatmapEntry, width: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} [{}]", entry.instance_id, entry.role);
    for (i, w) in entry.weights.iter().enumerate() {
        let n = (w * width as f64).round() as usize;
        let text = entry.sentences.get(i).map(String::as_str).unwrap_or("");
        let _ = write!(out, "  {i:>2} {w:.3} {:<width$} {text}", "#".repeat(n.min(width)));
        if let Some(v) = entry.votes.as_ref().and_then(|v| v.get(i)) {
            let _ = write!(out, "  votes={v}");
        }
        out.push('\n');
    }
    out
}

/// One JSON object per line.
pub fn write_heatmaps(path: &Path, entries: &[HeatmapEntry]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    for e in entries {
        let line = serde_json::to_string(e).map_err(|e| Error::Data(e.to_string()))?;
        writeln!(f, "{line}").map_err(|e| Error::io(path, e))?;
    }
    f.flush().map_err(|e| Error::io(path, e))
}

pub fn read_heatmaps(path: &Path) -> Result<Vec<HeatmapEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path.display(), i + 1, e)))
        .collect()
}
