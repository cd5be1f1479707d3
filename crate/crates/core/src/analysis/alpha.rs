use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Nominal Krippendorff's α, or why it is undefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "value")]
pub enum Alpha {
    Defined(f64),
    /// Fewer than two pairable values (no unit with ≥ 2 annotations).
    NoPairableUnits,
    /// Every pairable value is the same category, so expected
    /// disagreement is zero.
    NoVariation,
}

impl Alpha {
    pub fn value(&self) -> Option<f64> {
        match self {
            Alpha::Defined(a) => Some(*a),
            _ => None,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Defined(a) => write!(f, "{a:.4}"),
            Alpha::NoPairableUnits => f.write_str("undefined (no unit has two annotations)"),
            Alpha::NoVariation => f.write_str("undefined (no variation)"),
        }
    }
}

/// `α = 1 − D_o / D_e` over the coincidence matrix. Each inner vector holds
/// the values assigned to one unit; units with fewer than two values are
/// not pairable and are dropped.
pub fn krippendorff_alpha_nominal<T: Ord + Clone>(units: &[Vec<T>]) -> Alpha {
    // o[c][k] = Σ_u (number of ordered c-k pairs in u) / (m_u − 1)
    let mut o: BTreeMap<(T, T), f64> = BTreeMap::new();
    for values in units.iter().filter(|v| v.len() >= 2) {
        let w = 1.0 / (values.len() - 1) as f64;
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *o.entry((a.clone(), b.clone())).or_insert(0.0) += w;
                }
            }
        }
    }
    let mut n_c: BTreeMap<T, f64> = BTreeMap::new();
    for ((c, _), v) in &o {
        *n_c.entry(c.clone()).or_insert(0.0) += v;
    }
    let n: f64 = n_c.values().sum();
    if n < 2.0 {
        return Alpha::NoPairableUnits;
    }
    let observed: f64 = o.iter().filter(|((c, k), _)| c != k).map(|(_, v)| v).sum();
    let totals: Vec<f64> = n_c.values().copied().collect();
    let mut expected = 0.0;
    for (i, a) in totals.iter().enumerate() {
        for (j, b) in totals.iter().enumerate() {
            if i != j {
                expected += a * b;
            }
        }
    }
    if expected == 0.0 {
        return Alpha::NoVariation;
    }
    Alpha::Defined(1.0 - (n - 1.0) * observed / expected)
}

/// Sentence-count buckets used to report agreement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceBucket {
    Under3,
    Three,
    Four,
    Five,
    Over5,
}

impl SentenceBucket {
    pub fn of(sentences: usize) -> Self {
        match sentences {
            0..=2 => SentenceBucket::Under3,
            3 => SentenceBucket::Three,
            4 => SentenceBucket::Four,
            5 => SentenceBucket::Five,
            _ => SentenceBucket::Over5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SentenceBucket::Under3 => "<3",
            SentenceBucket::Three => "3",
            SentenceBucket::Four => "4",
            SentenceBucket::Five => "5",
            SentenceBucket::Over5 => ">5",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketAlpha {
    pub bucket: SentenceBucket,
    /// Units with at least two annotations.
    pub units: usize,
    pub alpha: Alpha,
}

/// α per sentence-count bucket; `units` pairs each unit's sentence count
/// with its values. Buckets with no units are omitted.
pub fn alpha_by_bucket<T: Ord + Clone>(units: &[(usize, Vec<T>)]) -> Vec<BucketAlpha> {
    let mut groups: BTreeMap<SentenceBucket, Vec<Vec<T>>> = BTreeMap::new();
    for (count, values) in units {
        groups.entry(SentenceBucket::of(*count)).or_default().push(values.clone());
    }
    groups
        .into_iter()
        .map(|(bucket, us)| BucketAlpha {
            bucket,
            units: us.iter().filter(|v| v.len() >= 2).count(),
            alpha: krippendorff_alpha_nominal(&us),
        })
        .collect()
}
