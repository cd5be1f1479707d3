use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted `(id, value)` pairs with no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn new() -> Self {
        SparseVector::default()
    }

    /// Sorts, merges duplicate ids by summing, and drops zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut merged: BTreeMap<u32, f64> = BTreeMap::new();
        for (id, v) in pairs {
            *merged.entry(id).or_default() += v;
        }
        SparseVector {
            entries: merged.into_iter().filter(|(_, v)| *v != 0.0).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn get(&self, id: u32) -> f64 {
        self.entries
            .binary_search_by_key(&id, |(i, _)| *i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Ids beyond `w.len()` contribute nothing.
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.entries
            .iter()
            .filter_map(|(i, v)| w.get(*i as usize).map(|wi| wi * v))
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }
}

/// Namespaced feature names to ids. Grows during fitting, then frozen.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureIndex {
    names: Vec<String>,
    ids: HashMap<String, u32>,
    frozen: bool,
}

impl FeatureIndex {
    pub fn new() -> Self {
        FeatureIndex::default()
    }

    /// Frozen index over the given names, in order.
    pub fn from_names(names: impl IntoIterator<Item = String>) -> Result<Self> {
        let mut idx = FeatureIndex::new();
        for n in names {
            if idx.ids.contains_key(&n) {
                return Err(Error::Data(format!("duplicate feature name '{n}'")));
            }
            idx.intern(&n);
        }
        idx.freeze();
        Ok(idx)
    }

    /// Id of `name`, adding it while not frozen. A frozen index never grows.
    pub fn intern(&mut self, name: &str) -> Option<u32> {
        if let Some(id) = self.ids.get(name) {
            return Some(*id);
        }
        if self.frozen {
            return None;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        Some(id)
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get(id as usize).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Maps named values onto a frozen index; unknown names are dropped.
    pub fn vectorize<'a>(&self, named: impl IntoIterator<Item = (&'a str, f64)>) -> Result<SparseVector> {
        if !self.frozen {
            return Err(Error::Config("feature index used before fitting".into()));
        }
        Ok(SparseVector::from_pairs(
            named.into_iter().filter_map(|(n, v)| self.get(n).map(|id| (id, v))),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn frozen_index_never_grows() {
        let mut idx = FeatureIndex::new();
        idx.intern("a");
        idx.freeze();
        assert_eq!(idx.intern("b"), None);
        assert_eq!(idx.len(), 1);
        let v = idx.vectorize([("a", 2.0), ("b", 1.0)]).unwrap();
        assert_eq!(v.iter().collect::<Vec<_>>(), [(0, 2.0)]);
        assert_eq!(idx.len(), 1);
    }

    #[test]
    fn unfit_index_is_error() {
        assert!(FeatureIndex::new().vectorize([("a", 1.0)]).is_err());
    }

    #[test]
    fn dot_matches_brute_force() {
        let x = SparseVector::from_pairs([(0, 1.5), (2, -2.0), (4, 0.5), (1, 3.0), (3, 1.0)]);
        let w = [0.2, -0.1, 0.3, 1.0, 2.0];
        let mut expected = 0.0;
        for (i, wi) in w.iter().enumerate() {
            expected += wi * x.get(i as u32);
        }
        assert!((x.dot(&w) - expected).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn ids_strictly_increasing_no_zeros(pairs in proptest::collection::vec((0u32..20, -2i32..3), 0..40)) {
            let v = SparseVector::from_pairs(pairs.iter().map(|(i, x)| (*i, *x as f64)));
            let ids: Vec<u32> = v.iter().map(|(i, _)| i).collect();
            prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(v.iter().all(|(_, x)| x != 0.0));
            for id in 0u32..20 {
                let sum: i32 = pairs.iter().filter(|(i, _)| *i == id).map(|(_, x)| *x).sum();
                prop_assert_eq!(v.get(id), sum as f64);
            }
        }
    }
}
