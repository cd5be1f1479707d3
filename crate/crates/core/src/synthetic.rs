//! Seeded generators for property tests and synthetic-scale experiments.

use crate::nn::Rng;
use crate::text::{EncodedInstance, EncodedTurn, Label, RawRecord};

/// First id used for ordinary words (below are pad, unk and boundary).
pub const FIRST_WORD_ID: u32 = 3;

/// Random turn with `1..=max_sents` valid sentences of `1..=max_words`
/// tokens each, drawn from ids `FIRST_WORD_ID..vocab`. Valid positions form
/// a prefix of each grid row, as the encoder produces.
pub fn random_turn(rng: &mut Rng, vocab: usize, max_sents: usize, max_words: usize) -> EncodedTurn {
    let mut t = EncodedTurn::padding(max_sents, max_words);
    let n_sents = 1 + rng.below(max_sents);
    for s in 0..n_sents {
        t.sent_mask[s] = true;
        for w in 0..1 + rng.below(max_words) {
            let k = s * max_words + w;
            t.ids[k] = FIRST_WORD_ID + rng.below(vocab - FIRST_WORD_ID as usize) as u32;
            t.word_mask[k] = true;
        }
    }
    t
}

pub fn random_instance(
    rng: &mut Rng,
    vocab: usize,
    max_sents: usize,
    max_words: usize,
    id: impl Into<String>,
) -> EncodedInstance {
    let label = if rng.bernoulli(0.5) { Label::Sarcastic } else { Label::NotSarcastic };
    EncodedInstance {
        id: id.into(),
        label,
        prior: random_turn(rng, vocab, max_sents, max_words),
        current: random_turn(rng, vocab, max_sents, max_words),
        succeeding: Some(random_turn(rng, vocab, max_sents, max_words)),
    }
}

/// The same turn on a larger grid; new positions are padding.
pub fn pad_turn(t: &EncodedTurn, extra_sents: usize, extra_words: usize) -> EncodedTurn {
    let (ms, mw) = (t.max_sents + extra_sents, t.max_words + extra_words);
    let mut out = EncodedTurn::padding(ms, mw);
    out.truncated = t.truncated;
    for s in 0..t.max_sents {
        out.sent_mask[s] = t.sent_mask[s];
        for w in 0..t.max_words {
            out.ids[s * mw + w] = t.id(s, w);
            out.word_mask[s * mw + w] = t.word_valid(s, w);
        }
    }
    out
}

pub fn pad_instance(inst: &EncodedInstance, extra_sents: usize, extra_words: usize) -> EncodedInstance {
    EncodedInstance {
        id: inst.id.clone(),
        label: inst.label,
        prior: pad_turn(&inst.prior, extra_sents, extra_words),
        current: pad_turn(&inst.current, extra_sents, extra_words),
        succeeding: inst.succeeding.as_ref().map(|t| pad_turn(t, extra_sents, extra_words)),
    }
}

const POSITIVE: &[&str] = &["love", "great", "wonderful", "awesome", "fantastic", "enjoy", "perfect", "brilliant"];
const NEGATIVE: &[&str] = &["hate", "awful", "terrible", "horrible", "worst", "annoying", "broken", "miserable"];
const NEUTRAL: &[&str] = &[
    "the", "train", "was", "today", "again", "my", "phone", "meeting", "this", "morning", "weather", "work",
    "people", "just", "about", "going", "office", "bus", "coffee", "week", "another", "monday", "line", "queue",
];

/// Corpus where sarcasm is sentiment incongruity: a sarcastic instance
/// pairs a negative prior turn with a positive current turn; every other
/// polarity pair is not sarcastic. Exactly one prior sentence carries the
/// prior turn's sentiment word.
#[derive(Clone, Debug, PartialEq)]
pub struct IncongruitySpec {
    pub n: usize,
    /// Share of sarcastic instances.
    pub sarcastic_share: f64,
    pub min_prior_sents: usize,
    pub max_prior_sents: usize,
    pub seed: u64,
}

impl Default for IncongruitySpec {
    fn default() -> Self {
        IncongruitySpec {
            n: 2000,
            sarcastic_share: 0.5,
            min_prior_sents: 1,
            max_prior_sents: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticRecord {
    pub record: RawRecord,
    /// Index of the prior sentence that carries sentiment.
    pub planted: usize,
    pub prior_positive: bool,
    pub current_positive: bool,
}

fn sentence(rng: &mut Rng, sentiment: Option<bool>) -> String {
    let len = 3 + rng.below(4);
    let mut words: Vec<&str> = (0..len).map(|_| *rng.choose(NEUTRAL)).collect();
    if let Some(pos) = sentiment {
        let w = if pos { *rng.choose(POSITIVE) } else { *rng.choose(NEGATIVE) };
        let at = rng.below(len + 1);
        words.insert(at, w);
    }
    format!("{} .", words.join(" "))
}

pub fn incongruity_corpus(spec: &IncongruitySpec) -> Vec<SyntheticRecord> {
    assert!(spec.min_prior_sents >= 1 && spec.min_prior_sents <= spec.max_prior_sents);
    let mut rng = Rng::new(spec.seed);
    (0..spec.n)
        .map(|i| {
            let sarcastic = rng.bernoulli(spec.sarcastic_share);
            let (p, c) = if sarcastic {
                (false, true)
            } else {
                [(true, true), (true, false), (false, false)][rng.below(3)]
            };
            let k = spec.min_prior_sents + rng.below(spec.max_prior_sents - spec.min_prior_sents + 1);
            let planted = rng.below(k);
            let prior: Vec<String> = (0..k)
                .map(|s| sentence(&mut rng, (s == planted).then_some(p)))
                .collect();
            let mut current = vec![sentence(&mut rng, Some(c))];
            if rng.bernoulli(0.5) {
                current.push(sentence(&mut rng, None));
            }
            SyntheticRecord {
                record: RawRecord {
                    id: format!("syn{i:05}"),
                    label: if sarcastic { Label::Sarcastic } else { Label::NotSarcastic }.as_str().to_string(),
                    prior: Some(prior.join(" ")),
                    current: Some(current.join(" ")),
                    ..RawRecord::default()
                },
                planted,
                prior_positive: p,
                current_positive: c,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Preprocessor;

    #[test]
    fn labels_follow_rule_and_sentences_survive_tokenizing() {
        let spec = IncongruitySpec { n: 300, min_prior_sents: 2, max_prior_sents: 5, ..Default::default() };
        let data = incongruity_corpus(&spec);
        let prep = Preprocessor::default();
        let mut s = 0;
        for r in &data {
            let sarcastic = !r.prior_positive && r.current_positive;
            assert_eq!(r.record.label == "S", sarcastic);
            s += sarcastic as usize;
            let inst = r.record.into_instance(&prep).unwrap();
            assert!((2..=5).contains(&inst.prior.sentences.len()));
            let lex = if r.prior_positive { POSITIVE } else { NEGATIVE };
            for (k, sent) in inst.prior.sentences.iter().enumerate() {
                let hits = sent.iter().filter(|t| POSITIVE.contains(&t.as_str()) || NEGATIVE.contains(&t.as_str()));
                let hits: Vec<&String> = hits.collect();
                assert_eq!(hits.len(), (k == r.planted) as usize);
                assert!(hits.iter().all(|t| lex.contains(&t.as_str())));
            }
        }
        assert!((120..180).contains(&s), "{s}");
        assert_eq!(incongruity_corpus(&spec), data);
    }

    #[test]
    fn padding_changes_grid_only() {
        let mut rng = Rng::new(1);
        let inst = random_instance(&mut rng, 20, 3, 4, "x");
        let p = pad_instance(&inst, 2, 1);
        assert_eq!(p.current.max_sents, 5);
        assert_eq!(p.current.num_words(), inst.current.num_words());
        for s in 0..3 {
            assert_eq!(p.current.sentence_ids(s), inst.current.sentence_ids(s));
        }
    }
}
