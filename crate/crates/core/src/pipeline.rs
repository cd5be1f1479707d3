//! Glue between raw records, vocabulary and encoded instances.

use crate::error::{Error, Result};
use crate::text::{encode_instance, ConversationInstance, EncodedInstance, PrepConfig, Preprocessor, RawRecord, Vocabulary};

/// Vocabulary over every sentence of every turn.
pub fn build_vocab<'a, I>(instances: I, min_count: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a ConversationInstance>,
{
    let sentences = instances.into_iter().flat_map(|inst| {
        [Some(&inst.prior), Some(&inst.current), inst.succeeding.as_ref()]
            .into_iter()
            .flatten()
            .flat_map(|t| t.sentences.iter())
    });
    Vocabulary::build(sentences.map(|s| s.iter().map(String::as_str)), min_count)
}

pub fn encode_all(instances: &[ConversationInstance], vocab: &Vocabulary, caps: &PrepConfig) -> Result<Vec<EncodedInstance>> {
    instances.iter().map(|i| encode_instance(i, vocab, caps)).collect()
}

pub fn records_to_instances(records: &[RawRecord], prep: &Preprocessor) -> Result<Vec<ConversationInstance>> {
    records
        .iter()
        .map(|r| r.into_instance(prep).map_err(|m| Error::Data(format!("record {}: {m}", r.id))))
        .collect()
}

/// Items at `idx`, in that order.
pub fn select<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}
