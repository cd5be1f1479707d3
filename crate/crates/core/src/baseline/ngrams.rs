use std::collections::BTreeMap;

use crate::lexicons::WordList;

/// Counts of 1..=`n_max`-grams, taken within sentences. Unigrams that are
/// stop words are skipped; longer n-grams keep them. Keys join tokens with
/// a single space.
pub fn ngram_counts(sentences: &[Vec<String>], n_max: usize, stop_words: &WordList) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for sent in sentences {
        for n in 1..=n_max {
            for gram in sent.windows(n) {
                if n == 1 && stop_words.contains(&gram[0]) {
                    continue;
                }
                *out.entry(gram.join(" ")).or_default() += 1;
            }
        }
    }
    out
}
