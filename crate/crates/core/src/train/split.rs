use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Rng;
use crate::text::Label;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.8,
            dev: 0.1,
            test: 0.1,
            seed: 0,
        }
    }
}

/// Index lists into the original data, each sorted ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class seeded shuffle; each class contributes `round(f · n_c)` to
/// train and dev and the remainder to test.
pub fn stratified_split(labels: &[Label], spec: &SplitSpec) -> Result<Splits> {
    let sum = spec.train + spec.dev + spec.test;
    if [spec.train, spec.dev, spec.test].iter().any(|f| !(0.0..=1.0).contains(f)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions must be in [0, 1] and sum to 1, got {}/{}/{}",
            spec.train, spec.dev, spec.test
        )));
    }
    let mut rng = Rng::new(spec.seed);
    let mut out = Splits::default();
    for label in Label::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        rng.shuffle(&mut idx);
        let n = idx.len() as f64;
        let n_train = ((spec.train * n).round() as usize).min(idx.len());
        let n_dev = ((spec.dev * n).round() as usize).min(idx.len() - n_train);
        out.train.extend_from_slice(&idx[..n_train]);
        out.dev.extend_from_slice(&idx[n_train..n_train + n_dev]);
        out.test.extend_from_slice(&idx[n_train + n_dev..]);
    }
    out.train.sort_unstable();
    out.dev.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}
