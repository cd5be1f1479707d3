use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

/// Deterministic record of a run: equal inputs give a byte-identical file.
/// Wall-clock timings live in a separate `timings.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    /// Package version plus the first 12 hex digits of the primary
    /// artifact's SHA-256, e.g. `0.1.0+3fa4c2d19e0b`.
    pub artifact_version: String,
    pub command: String,
    pub seed: u64,
    /// The full configuration in flat `key = value` form.
    pub config: String,
    /// SHA-256 of every input file, by role (`data`, `splits`, ...).
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of every output file, by file name.
    pub artifacts: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: String, primary_sha: &str) -> Self {
        RunManifest {
            tool: "sarc".into(),
            artifact_version: format!("{}+{}", env!("CARGO_PKG_VERSION"), &primary_sha[..12.min(primary_sha.len())]),
            command: command.into(),
            seed,
            config,
            inputs: BTreeMap::new(),
            artifacts: BTreeMap::new(),
        }
    }
}

/// Named phase durations in seconds.
#[derive(Debug)]
pub struct Timings {
    start: Instant,
    last: Instant,
    phases: BTreeMap<String, f64>,
}

impl Default for Timings {
    fn default() -> Self {
        let now = Instant::now();
        Timings {
            start: now,
            last: now,
            phases: BTreeMap::new(),
        }
    }
}

impl Timings {
    /// Records the time since the previous mark under `name`.
    pub fn mark(&mut self, name: &str) {
        let now = Instant::now();
        self.phases.insert(format!("{name}_secs"), (now - self.last).as_secs_f64());
        self.last = now;
    }

    pub fn finish(mut self) -> BTreeMap<String, f64> {
        self.phases.insert("total_secs".into(), self.start.elapsed().as_secs_f64());
        self.phases
    }
}
