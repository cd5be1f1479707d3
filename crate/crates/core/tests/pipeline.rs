//! Library-level round trip: JSONL text to a trained model, through a
//! checkpoint and back.

use sarc_core::model::{Architecture, Checkpoint, ContextUse, Model, ModelConfig, ModelParams};
use sarc_core::pipeline::{build_vocab, encode_all, select};
use sarc_core::synthetic::{incongruity_corpus, IncongruitySpec};
use sarc_core::text::{parse_dataset, parse_unlabeled, PrepConfig, Preprocessor, Vocabulary};
use sarc_core::train::{evaluate_model, stratified_split, train_model, Hyperparams, SplitSpec};

fn corpus_jsonl(n: usize) -> String {
    let spec = IncongruitySpec { n, seed: 11, ..IncongruitySpec::default() };
    incongruity_corpus(&spec)
        .iter()
        .map(|r| serde_json::to_string(&r.record).unwrap() + "\n")
        .collect()
}

#[test]
fn train_save_load_predict() {
    let prep = Preprocessor::default();
    let insts = parse_dataset("corpus", &corpus_jsonl(300), &prep).unwrap();
    let labels: Vec<_> = insts.iter().map(|i| i.label).collect();
    let splits = stratified_split(&labels, &SplitSpec { seed: 11, ..SplitSpec::default() }).unwrap();
    let train_insts = select(&insts, &splits.train);
    let vocab = build_vocab(&train_insts, 1);
    let caps = PrepConfig::default();
    let train = encode_all(&train_insts, &vocab, &caps).unwrap();
    let dev = encode_all(&select(&insts, &splits.dev), &vocab, &caps).unwrap();
    let test = encode_all(&select(&insts, &splits.test), &vocab, &caps).unwrap();

    let config = ModelConfig::new(Architecture::AttnSent, ContextUse::Pt).with_dims(16, 16, 16);
    let init = ModelParams::init(&config, vocab.len(), None, 11).unwrap();
    let hyper = Hyperparams { epochs: 8, seed: 11, ..Hyperparams::default() };
    let out = train_model(&config, init, &train, &dev, &hyper).unwrap();
    let report = evaluate_model(&config, &out.best, &test).unwrap();
    assert!(report.macro_f1 > 0.6, "macro-F1 {}", report.macro_f1);

    let dir = tempfile::tempdir().unwrap();
    let ckpt = Checkpoint {
        config: config.clone(),
        vocab_hash: vocab.hash(),
        meta: serde_json::json!({ "best_epoch": out.best_epoch }),
        params: out.best.clone(),
    };
    ckpt.save(&dir.path().join("m.ckpt")).unwrap();
    vocab.save(dir.path().join("vocab.tsv")).unwrap();

    let loaded = Checkpoint::load(&dir.path().join("m.ckpt")).unwrap();
    let vocab2 = Vocabulary::load(dir.path().join("vocab.tsv")).unwrap();
    assert_eq!(loaded, ckpt);
    assert_eq!(vocab2.hash(), loaded.vocab_hash);

    let before = Model::new(config, out.best).predict_all(&test).unwrap();
    let after = Model::new(loaded.config, loaded.params).predict_all(&test).unwrap();
    assert_eq!(before, after);
}

#[test]
fn unlabeled_lines_parse_but_labeled_parse_rejects_them() {
    let prep = Preprocessor::default();
    let text = "{\"id\":\"a\",\"prior\":\"It rained.\",\"current\":\"Lovely.\"}\n\
                {\"id\":\"b\",\"label\":\"S\",\"prior\":\"It rained.\",\"current\":\"Lovely.\"}\n";
    let rows = parse_unlabeled("x", text, &prep).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].1.is_none());
    assert!(rows[1].1.is_some());
    assert!(parse_dataset("x", text, &prep).is_err());
}
