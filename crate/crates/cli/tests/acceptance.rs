//! Acceptance criteria AC1-AC10. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.
//!
//! Run a subset with `cargo test -p sarc-cli --test acceptance -- AC2 AC7`.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use sarc_core::analysis::{krippendorff_alpha_nominal, max_attention_sentence, Alpha};
use sarc_core::baseline::{
    hinge_objective, predict_linear, tfidf_transform, train_linear, BaselineConfig, FeatureKind, FeaturePipeline,
    LinearHyper, SparseVector,
};
use sarc_core::lexicons::{parse_lexicon, Lexicon, LexiconKind, LexiconSet};
use sarc_core::model::{
    attention_backward, attention_forward, backward_sequence, loss_and_grads, model_forward, run_sequence,
    AttentionLayout, AttentionParams, Architecture, ContextUse, LstmParams, LstmState, Model, ModelConfig,
    ModelParams,
};
use sarc_core::nn::{affine, affine_backward, grad_check, softmax, softmax_backward, DropoutMask, Matrix, ParamSet, Rng};
use sarc_core::pipeline::{build_vocab, encode_all, records_to_instances, select};
use sarc_core::synthetic::{incongruity_corpus, pad_instance, random_instance, IncongruitySpec, SyntheticRecord};
use sarc_core::text::{ConversationInstance, EncodedInstance, EncodedTurn, Label, PrepConfig, Preprocessor, RawRecord, TurnRole};
use sarc_core::train::{
    class_weights, evaluate_model, evaluate_predictions, stratified_split, train_model, Hyperparams, SplitSpec,
};

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const SEEDS: [u64; 3] = [0, 1, 2];

fn main() {
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, &str, fn() -> Check); 10] = [
        ("AC1", "gradient correctness", ac1),
        ("AC2", "attention normalization and masking", ac2),
        ("AC3", "conditional-encoding contract", ac3),
        ("AC4", "overfit sanity", ac4),
        ("AC5", "context helps", ac5),
        ("AC6", "attention localization", ac6),
        ("AC7", "metric oracles", ac7),
        ("AC8", "baseline fidelity", ac8),
        ("AC9", "determinism", ac9),
        ("AC10", "unbalanced setting", ac10),
    ];
    let mut failed = 0;
    let mut ran = 0;
    for (id, name, f) in criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("{id} PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- AC1

fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::uniform(rows, cols, -0.5, 0.5, rng)
}

fn random_vec(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

/// A random instance with up to 5 sentences of up to 6 words per turn.
fn sample_instance(rng: &mut Rng, vocab: usize, id: impl Into<String>) -> EncodedInstance {
    let (s, w) = (1 + rng.below(5), 1 + rng.below(6));
    random_instance(rng, vocab, s, w, id)
}

fn dims(rng: &mut Rng) -> (usize, usize, usize) {
    (2 + rng.below(7), 2 + rng.below(7), 2 + rng.below(7))
}

fn all_configs(rng: &mut Rng) -> Vec<ModelConfig> {
    let mut out = Vec::new();
    for arch in Architecture::ALL {
        for ctx in [ContextUse::None, ContextUse::Pt, ContextUse::St, ContextUse::PtSt] {
            let (h, a, e) = dims(rng);
            let c = ModelConfig::new(arch, ctx).with_dims(h, a, e);
            if c.validate().is_ok() {
                out.push(c);
            }
        }
    }
    let (h, a, e) = dims(rng);
    let mut c = ModelConfig::new(Architecture::AttnSent, ContextUse::PtSt).with_dims(h, a, e);
    c.attention_layout = AttentionLayout::Concat;
    out.push(c);
    let mut c = ModelConfig::new(Architecture::AttnSent, ContextUse::Pt).with_dims(h, a, e);
    c.last_pt_only = true;
    out.push(c);
    out
}

/// Initialized parameters with every bias randomized, so no gradient path
/// is silent.
fn perturbed(config: &ModelConfig, vocab: usize, seed: u64) -> ModelParams {
    let mut p = ModelParams::init(config, vocab, None, seed).unwrap();
    let mut rng = Rng::new(seed ^ 0xa5a5);
    for (name, m) in p.blocks_mut() {
        if name.ends_with(".b") || name.contains(".b_") || name == "classifier.b" {
            for x in m.as_mut_slice() {
                *x = rng.uniform(-0.3, 0.3);
            }
        }
    }
    p
}

struct Affine {
    w: Matrix,
    b: Matrix,
}

impl ParamSet for Affine {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![("w".into(), &self.w), ("b".into(), &self.b)]
    }
    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        vec![("w".into(), &mut self.w), ("b".into(), &mut self.b)]
    }
}

fn ac1() -> Check {
    const TOL: f64 = 1e-4;
    let t0 = Instant::now();
    let mut rng = Rng::new(2024);
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    let mut record = |name: String, rel: f64, passed: bool| -> Result<(), String> {
        worst = worst.max(rel);
        checks += 1;
        if passed {
            Ok(())
        } else {
            Err(format!("{name}: relative error {rel:e}"))
        }
    };

    for trial in 0..5 {
        // LSTM over a masked sequence; the loss reads every h_t and the final c.
        let (h, x) = (2 + rng.below(7), 2 + rng.below(6));
        let t = 1 + rng.below(6);
        let mut p = LstmParams::uniform(h, x, 0.5, &mut rng);
        for b in [&mut p.b_i, &mut p.b_f, &mut p.b_o, &mut p.b_c] {
            *b = random_matrix(h, 1, &mut rng);
        }
        let xs: Vec<Vec<f64>> = (0..t).map(|_| random_vec(x, &mut rng)).collect();
        let mut mask: Vec<bool> = (0..t).map(|_| rng.bernoulli(0.8)).collect();
        mask[0] = true;
        let proj: Vec<Vec<f64>> = (0..t).map(|_| random_vec(h, &mut rng)).collect();
        let cproj = random_vec(h, &mut rng);
        let init = LstmState {
            h: random_vec(h, &mut rng),
            c: random_vec(h, &mut rng),
        };
        let loss = |q: &LstmParams| {
            let tr = run_sequence(q, &xs, &mask, &init)?;
            let mut l: f64 = tr.states.iter().zip(&proj).map(|(s, w)| s.h.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()).sum();
            l += tr.final_state().c.iter().zip(&cproj).map(|(a, b)| a * b).sum::<f64>();
            Ok(l)
        };
        let tr = run_sequence(&p, &xs, &mask, &init).map_err(|e| e.to_string())?;
        let mut g = LstmParams::zeros(h, x);
        backward_sequence(&p, &tr, &proj, &vec![0.0; h], &cproj, &mut g);
        let r = grad_check(&mut p, &g, 1e-6, TOL, loss).map_err(|e| e.to_string())?;
        record(format!("lstm trial {trial}"), r.max_rel_error, r.passed)?;

        // Attention pooling.
        let (a, d, n) = (2 + rng.below(7), 2 + rng.below(7), 1 + rng.below(5));
        let mut ap = AttentionParams::uniform(a, d, 0.8, &mut rng);
        ap.b = random_matrix(a, 1, &mut rng);
        let hs: Vec<Vec<f64>> = (0..n).map(|_| random_vec(d, &mut rng)).collect();
        let mut amask: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.7)).collect();
        amask[n - 1] = true;
        let proj = random_vec(d, &mut rng);
        let aloss = |q: &AttentionParams| {
            let (v, _) = attention_forward(q, &hs, &amask)?;
            Ok(v.iter().zip(&proj).map(|(a, b)| a * b).sum())
        };
        let (_, trace) = attention_forward(&ap, &hs, &amask).map_err(|e| e.to_string())?;
        let mut ag = AttentionParams::zeros(a, d);
        attention_backward(&ap, &hs, &trace, &proj, &mut ag);
        let r = grad_check(&mut ap, &ag, 1e-6, TOL, aloss).map_err(|e| e.to_string())?;
        record(format!("attention trial {trial}"), r.max_rel_error, r.passed)?;

        // Affine + softmax + NLL, with a dropout mask on the input.
        let din = 2 + rng.below(7);
        let mut lin = Affine {
            w: random_matrix(2, din, &mut rng),
            b: random_matrix(2, 1, &mut rng),
        };
        let z = random_vec(din, &mut rng);
        let drop = DropoutMask::sample(0.5, din, &mut rng).map_err(|e| e.to_string())?;
        let zd = drop.apply(&z).map_err(|e| e.to_string())?;
        let y = rng.below(2);
        let lloss = |q: &Affine| {
            let p = softmax(&affine(&q.w, &zd, q.b.as_slice())?)?;
            Ok(-p[y].ln())
        };
        let probs = softmax(&affine(&lin.w, &zd, lin.b.as_slice()).unwrap()).unwrap();
        let mut dp = vec![0.0; 2];
        dp[y] = -1.0 / probs[y];
        let ds = softmax_backward(&probs, &dp);
        let mut lg = Affine {
            w: Matrix::zeros(2, din),
            b: Matrix::zeros(2, 1),
        };
        let mut dz = vec![0.0; din];
        affine_backward(&lin.w, &zd, &ds, &mut lg.w, lg.b.as_mut_slice(), &mut dz).map_err(|e| e.to_string())?;
        let r = grad_check(&mut lin, &lg, 1e-6, TOL, lloss).map_err(|e| e.to_string())?;
        record(format!("affine-softmax trial {trial}"), r.max_rel_error, r.passed)?;
    }

    // Every full architecture on randomized sizes (<= 5 sentences x 6 words).
    for round in 0..2 {
        for (k, config) in all_configs(&mut rng).into_iter().enumerate() {
            let vocab = 6 + rng.below(10);
            let mut params = perturbed(&config, vocab, (round * 100 + k) as u64);
            let inst = sample_instance(&mut rng, vocab, "g");
            let w = rng.uniform(0.5, 2.0);
            let (_, grads) = loss_and_grads(&config, &params, &inst, w, 1e-3, None).map_err(|e| e.to_string())?;
            let r = grad_check(&mut params, &grads, 1e-5, TOL, |p| {
                loss_and_grads(&config, p, &inst, w, 1e-3, None).map(|(l, _)| l)
            })
            .map_err(|e| e.to_string())?;
            record(format!("{config}"), r.max_rel_error, r.passed)?;
        }
    }
    let elapsed = t0.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}, limit 60s");
    Ok(format!("{checks} checks, max relative error {worst:.2e} < 1e-4"))
}

// ---------------------------------------------------------------- AC2

fn ac2() -> Check {
    let mut rng = Rng::new(77);
    let mut worst_sum: f64 = 0.0;
    let mut worst_pad: f64 = 0.0;
    let mut blocks = 0;
    let mut configs = Vec::new();
    while configs.len() < 40 {
        configs.extend(all_configs(&mut rng).into_iter().filter(|c| c.architecture.has_attention()));
    }
    for i in 0..1000 {
        let config = &configs[i % configs.len()];
        let vocab = 5 + rng.below(20);
        let params = perturbed(config, vocab, i as u64);
        let inst = sample_instance(&mut rng, vocab, format!("r{i}"));
        let pass = model_forward(config, &params, &inst, None).map_err(|e| e.to_string())?;
        ensure!((pass.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12, "{config}: probabilities do not sum to 1");
        for b in &pass.record.blocks {
            blocks += 1;
            ensure!(b.weights.len() == b.mask.len(), "{config}: weights and mask lengths differ");
            let s: f64 = b.weights.iter().sum();
            worst_sum = worst_sum.max((s - 1.0).abs());
            ensure!((s - 1.0).abs() <= 1e-6, "{config}: block {:?} sums to {s}", b.level);
            for (w, m) in b.weights.iter().zip(&b.mask) {
                ensure!(*m || *w == 0.0, "{config}: masked position has weight {w}");
            }
            ensure!(b.weights.iter().all(|w| *w >= 0.0), "{config}: negative attention weight");
        }
        let padded = pad_instance(&inst, 1 + rng.below(3), 1 + rng.below(3));
        let pp = model_forward(config, &params, &padded, None).map_err(|e| e.to_string())?;
        let d = pass.probs.iter().zip(&pp.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_pad = worst_pad.max(d);
        ensure!(d < 1e-12, "{config}: padding moved probabilities by {d:e}");
    }
    Ok(format!(
        "1000 instances, {blocks} blocks, max |sum-1| {worst_sum:.1e}, max padding shift {worst_pad:.1e}"
    ))
}

// ---------------------------------------------------------------- AC3

fn ac3() -> Check {
    let mut rng = Rng::new(31);
    let mut n = 0;
    for i in 0..300 {
        let ctx = [ContextUse::Pt, ContextUse::St, ContextUse::PtSt][i % 3];
        let (h, a, e) = dims(&mut rng);
        let config = ModelConfig::new(Architecture::Conditional, ctx).with_dims(h, a, e);
        let vocab = 5 + rng.below(20);
        let params = perturbed(&config, vocab, i as u64);
        let inst = sample_instance(&mut rng, vocab, "c");
        let pass = model_forward(&config, &params, &inst, None).map_err(|e| e.to_string())?;
        let (init, fin) = (pass.initial_cells(), pass.final_cells());
        ensure!(init.len() == config.roles().len(), "chain length {} for {config}", init.len());
        ensure!(init[0].iter().all(|c| *c == 0.0), "first encoder starts from a nonzero cell");
        for k in 1..init.len() {
            ensure!(init[k] == fin[k - 1], "{config}: encoder {k} does not start from encoder {}'s cell", k - 1);
        }
        n += 1;
    }
    for i in 0..300 {
        let (h, a, e) = dims(&mut rng);
        let cond = ModelConfig::new(Architecture::Conditional, ContextUse::Pt).with_dims(h, a, e);
        let ct = ModelConfig::new(Architecture::Ct, ContextUse::None).with_dims(h, a, e);
        let vocab = 5 + rng.below(20);
        let pc = perturbed(&cond, vocab, 1000 + i as u64);
        let mut p0 = ModelParams::init(&ct, vocab, None, 0).unwrap();
        p0.embeddings = pc.embeddings.clone();
        p0.encoders[0].1 = pc.encoder("ct").unwrap().clone();
        p0.out_w = pc.out_w.clone();
        p0.out_b = pc.out_b.clone();
        let mut inst = sample_instance(&mut rng, vocab, "p");
        inst.prior = EncodedTurn::padding(inst.prior.max_sents, inst.prior.max_words);
        let a = model_forward(&cond, &pc, &inst, None).map_err(|e| e.to_string())?;
        let b = model_forward(&ct, &p0, &inst, None).map_err(|e| e.to_string())?;
        ensure!(a.probs == b.probs, "all-padding context changed the output: {:?} vs {:?}", a.probs, b.probs);
        ensure!(a.features() == b.features(), "all-padding context changed the features");
    }
    Ok(format!("{n} chains with bitwise cell hand-off; 300 all-padding contexts equal the context-free model exactly"))
}

// ------------------------------------------------- synthetic experiments

struct Prepared {
    records: Vec<SyntheticRecord>,
    test_idx: Vec<usize>,
    train: Vec<EncodedInstance>,
    dev: Vec<EncodedInstance>,
    test: Vec<EncodedInstance>,
    vocab_len: usize,
}

/// `n_s` sarcastic and `n_ns` other records: the first of each label from
/// a draw large enough to hold both, in draw order.
fn exact_mix(spec: &IncongruitySpec, n_s: usize, n_ns: usize) -> Vec<SyntheticRecord> {
    let mut n = 2 * (n_s + n_ns);
    loop {
        let (mut s, mut ns) = (0, 0);
        let out: Vec<SyntheticRecord> = incongruity_corpus(&IncongruitySpec { n, ..spec.clone() })
            .into_iter()
            .filter(|r| {
                let c = if r.record.label == "S" { &mut s } else { &mut ns };
                *c += 1;
                *c <= if r.record.label == "S" { n_s } else { n_ns }
            })
            .collect();
        if out.len() == n_s + n_ns {
            return out;
        }
        n *= 2;
    }
}

fn prepare(spec: &IncongruitySpec) -> Prepared {
    prepare_records(incongruity_corpus(spec), spec.seed)
}

fn prepare_records(records: Vec<SyntheticRecord>, seed: u64) -> Prepared {
    let raw: Vec<RawRecord> = records.iter().map(|r| r.record.clone()).collect();
    let insts = records_to_instances(&raw, &Preprocessor::default()).unwrap();
    let labels: Vec<Label> = insts.iter().map(|i| i.label).collect();
    let splits = stratified_split(&labels, &SplitSpec { seed, ..SplitSpec::default() }).unwrap();
    let train_insts = select(&insts, &splits.train);
    let vocab = build_vocab(&train_insts, 1);
    let caps = PrepConfig::default();
    Prepared {
        train: encode_all(&train_insts, &vocab, &caps).unwrap(),
        dev: encode_all(&select(&insts, &splits.dev), &vocab, &caps).unwrap(),
        test: encode_all(&select(&insts, &splits.test), &vocab, &caps).unwrap(),
        test_idx: splits.test,
        vocab_len: vocab.len(),
        records,
    }
}

fn fit(p: &Prepared, arch: Architecture, ctx: ContextUse, seed: u64) -> Result<ModelParams, String> {
    let config = ModelConfig::new(arch, ctx);
    let init = ModelParams::init(&config, p.vocab_len, None, seed).map_err(|e| e.to_string())?;
    let hyper = Hyperparams { seed, ..Hyperparams::default() };
    Ok(train_model(&config, init, &p.train, &p.dev, &hyper).map_err(|e| e.to_string())?.best)
}

fn test_scores(p: &Prepared, arch: Architecture, ctx: ContextUse, seed: u64) -> Result<(f64, f64, ModelParams), String> {
    let params = fit(p, arch, ctx, seed)?;
    let r = evaluate_model(&ModelConfig::new(arch, ctx), &params, &p.test).map_err(|e| e.to_string())?;
    Ok((r.macro_f1, r.class(Label::Sarcastic).f1, params))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn pct(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{:.2}", 100.0 * x)).collect::<Vec<_>>().join("/")
}

// ---------------------------------------------------------------- AC4

fn ac4() -> Check {
    let t0 = Instant::now();
    let records = exact_mix(&IncongruitySpec { seed: 4, ..IncongruitySpec::default() }, 32, 32);
    let raw: Vec<RawRecord> = records.iter().map(|r| r.record.clone()).collect();
    let insts = records_to_instances(&raw, &Preprocessor::default()).map_err(|e| e.to_string())?;
    let vocab = build_vocab(&insts, 1);
    let data = encode_all(&insts, &vocab, &PrepConfig::default()).map_err(|e| e.to_string())?;
    let config = ModelConfig::new(Architecture::AttnSent, ContextUse::Pt);
    let init = ModelParams::init(&config, vocab.len(), None, 4).map_err(|e| e.to_string())?;
    let hyper = Hyperparams { epochs: 300, seed: 4, eval_train: true, ..Hyperparams::default() };
    let out = train_model(&config, init, &data, &[], &hyper).map_err(|e| e.to_string())?;
    let first = out.history.iter().find(|r| r.train_accuracy.unwrap_or(0.0) >= 0.95);
    let elapsed = t0.elapsed();
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}, limit 5 min");
    match first {
        Some(r) => Ok(format!(
            "{config} reached {:.1}% training accuracy at epoch {} of 300",
            100.0 * r.train_accuracy.unwrap(),
            r.epoch
        )),
        None => {
            let best = out.history.iter().filter_map(|r| r.train_accuracy).fold(0.0, f64::max);
            Err(format!("best training accuracy {:.1}% < 95%", 100.0 * best))
        }
    }
}

// ---------------------------------------------------------------- AC5

fn ac5() -> Check {
    let t0 = Instant::now();
    let (mut ctx_f1, mut ct_f1) = (Vec::new(), Vec::new());
    for seed in SEEDS {
        let p = prepare(&IncongruitySpec { seed, ..IncongruitySpec::default() });
        ct_f1.push(test_scores(&p, Architecture::Ct, ContextUse::None, seed)?.0);
        ctx_f1.push(test_scores(&p, Architecture::AttnSent, ContextUse::Pt, seed)?.0);
    }
    let gap = 100.0 * (mean(&ctx_f1) - mean(&ct_f1));
    let elapsed = t0.elapsed();
    let detail = format!(
        "macro-F1 attn_sent[pt] {} vs ct {} (seeds 0/1/2), mean gap {gap:.2} points",
        pct(&ctx_f1),
        pct(&ct_f1)
    );
    ensure!(elapsed < Duration::from_secs(900), "{detail}; took {elapsed:?}, limit 15 min");
    ensure!(gap >= 10.0, "{detail} < 10");
    Ok(detail)
}

// ---------------------------------------------------------------- AC6

fn ac6() -> Check {
    let mut rates = Vec::new();
    let mut ties = 0;
    for seed in SEEDS {
        let spec = IncongruitySpec { seed, min_prior_sents: 3, max_prior_sents: 5, ..IncongruitySpec::default() };
        let p = prepare(&spec);
        let config = ModelConfig::new(Architecture::AttnSent, ContextUse::Pt);
        let model = Model::new(config, fit(&p, Architecture::AttnSent, ContextUse::Pt, seed)?);
        let mut hits = 0;
        for (k, &i) in p.test_idx.iter().enumerate() {
            let pred = model.predict(&p.test[k]).map_err(|e| e.to_string())?;
            let m = max_attention_sentence(&pred.attention, TurnRole::Prior).map_err(|e| e.to_string())?;
            ties += m.tie as usize;
            hits += (m.index == p.records[i].planted) as usize;
        }
        rates.push(hits as f64 / p.test_idx.len() as f64);
    }
    let avg = 100.0 * mean(&rates);
    let detail = format!(
        "attn_sent[pt], 3-5 prior sentences: planted sentence recovered on {}% (seeds 0/1/2), mean {avg:.2}%, {ties} ties",
        pct(&rates)
    );
    ensure!(avg >= 80.0, "{detail} < 80%");
    Ok(detail)
}

// ---------------------------------------------------------------- AC7

fn brute_prf(gold: &[Label], pred: &[Label], class: Label) -> (f64, f64, f64) {
    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut fnn = 0.0;
    for i in 0..gold.len() {
        if pred[i] == class && gold[i] == class {
            tp += 1.0;
        } else if pred[i] == class {
            fp += 1.0;
        } else if gold[i] == class {
            fnn += 1.0;
        }
    }
    let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let r = if tp + fnn > 0.0 { tp / (tp + fnn) } else { 0.0 };
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f)
}

/// Nominal α from an explicit loop over ordered value pairs within units.
fn brute_alpha(units: &[Vec<u32>]) -> Option<f64> {
    let mut o: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for u in units.iter().filter(|u| u.len() >= 2) {
        let m = u.len() as f64;
        for i in 0..u.len() {
            for j in 0..u.len() {
                if i != j {
                    *o.entry((u[i], u[j])).or_default() += 1.0 / (m - 1.0);
                }
            }
        }
    }
    let n: f64 = o.values().sum();
    let mut marg: BTreeMap<u32, f64> = BTreeMap::new();
    for (&(c, _), v) in &o {
        *marg.entry(c).or_default() += v;
    }
    let d_o: f64 = o.iter().filter(|((a, b), _)| a != b).map(|(_, v)| v).sum::<f64>() / n;
    let mut d_e = 0.0;
    for (a, na) in &marg {
        for (b, nb) in &marg {
            if a != b {
                d_e += na * nb;
            }
        }
    }
    d_e /= n * (n - 1.0);
    (d_e > 0.0).then(|| 1.0 - d_o / d_e)
}

fn ac7() -> Check {
    let mut rng = Rng::new(7);
    // Precision, recall and F1.
    for trial in 0..200 {
        let n = 1 + rng.below(40);
        let gold: Vec<Label> = (0..n).map(|_| Label::from_index(rng.below(2))).collect();
        let pred: Vec<Label> = (0..n).map(|_| Label::from_index(rng.below(2))).collect();
        let r = evaluate_predictions(&gold, &pred).map_err(|e| e.to_string())?;
        let mut f1s = Vec::new();
        for class in Label::ALL {
            let (p, rc, f) = brute_prf(&gold, &pred, class);
            let c = r.class(class);
            ensure!(
                (c.precision - p).abs() < 1e-9 && (c.recall - rc).abs() < 1e-9 && (c.f1 - f).abs() < 1e-9,
                "trial {trial}: {class} scores differ from the loop"
            );
            f1s.push(f);
        }
        ensure!((r.macro_f1 - mean(&f1s)).abs() < 1e-9, "trial {trial}: macro-F1 differs");
    }
    let hand = evaluate_predictions(
        &[Label::Sarcastic, Label::Sarcastic, Label::NotSarcastic, Label::NotSarcastic],
        &[Label::Sarcastic, Label::NotSarcastic, Label::NotSarcastic, Label::NotSarcastic],
    )
    .map_err(|e| e.to_string())?;
    // S: P = 1, R = 1/2, F1 = 2/3; NS: P = 2/3, R = 1, F1 = 4/5.
    ensure!((hand.class(Label::Sarcastic).f1 - 2.0 / 3.0).abs() < 1e-12, "hand S F1");
    ensure!((hand.class(Label::NotSarcastic).f1 - 0.8).abs() < 1e-12, "hand NS F1");

    // Class weights N / (K * N_c).
    for _ in 0..100 {
        let n = 2 + rng.below(50);
        let mut labels: Vec<Label> = (0..n).map(|_| Label::from_index(rng.below(2))).collect();
        labels[0] = Label::Sarcastic;
        labels[1] = Label::NotSarcastic;
        let w = class_weights(&labels).map_err(|e| e.to_string())?;
        for class in Label::ALL {
            let mut nc = 0.0;
            for l in &labels {
                if *l == class {
                    nc += 1.0;
                }
            }
            let expect = n as f64 / (2.0 * nc);
            ensure!((w[class.index()] - expect).abs() < 1e-9, "class weight {class}: {} vs {expect}", w[class.index()]);
        }
    }

    // tf-idf weights.
    let mut counts = BTreeMap::new();
    let mut df = BTreeMap::new();
    let n_turns = 12;
    for k in 0..10 {
        let g = format!("g{k}");
        counts.insert(g.clone(), 1 + rng.below(4));
        df.insert(g, 1 + rng.below(n_turns));
    }
    for min_df in [1, 3, 6] {
        let got = tfidf_transform(&counts, &df, n_turns, min_df).map_err(|e| e.to_string())?;
        let mut expect = BTreeMap::new();
        for (g, &tf) in &counts {
            let d = df[g];
            if d >= min_df {
                expect.insert(g.clone(), tf as f64 * (n_turns as f64 / d as f64).ln());
            }
        }
        ensure!(got.len() == expect.len(), "tf-idf kept {} n-grams, expected {}", got.len(), expect.len());
        for (g, v) in &expect {
            ensure!((got[g] - v).abs() < 1e-9, "tf-idf {g}: {} vs {v}", got[g]);
        }
    }

    // Krippendorff's alpha.
    let perfect = vec![vec![1u32, 1, 1], vec![2, 2], vec![0, 0, 0, 0]];
    ensure!(krippendorff_alpha_nominal(&perfect) == Alpha::Defined(1.0), "perfect agreement is not 1");
    // Units {x,x}, {y,y}, {x,y}: o_xx = o_yy = 2, o_xy = o_yx = 1, n = 6,
    // D_o = 2/6, D_e = 2*3*3/30, alpha = 1 - (1/3)/(3/5) = 4/9.
    let hand = vec![vec![0u32, 0], vec![1, 1], vec![0, 1]];
    let a = krippendorff_alpha_nominal(&hand).value().ok_or("hand case undefined")?;
    ensure!((a - 4.0 / 9.0).abs() < 1e-9, "hand case alpha {a} != 4/9");
    // Units {x,x,y}, {y,y}, {x,y}: D_o = D_e = 4/7, alpha = 0.
    let zero = vec![vec![0u32, 0, 1], vec![1, 1], vec![0, 1]];
    let z = krippendorff_alpha_nominal(&zero).value().ok_or("zero case undefined")?;
    ensure!(z.abs() < 1e-9, "second hand case alpha {z} != 0");
    let mut compared = 0;
    for _ in 0..300 {
        let units: Vec<Vec<u32>> = (0..1 + rng.below(8))
            .map(|_| (0..1 + rng.below(5)).map(|_| rng.below(3) as u32).collect())
            .collect();
        match (krippendorff_alpha_nominal(&units).value(), brute_alpha(&units)) {
            (Some(a), Some(b)) => {
                ensure!((a - b).abs() < 1e-9, "alpha {a} vs loop {b} on {units:?}");
                compared += 1;
            }
            (None, None) => {}
            (a, b) => return Err(format!("alpha definedness differs on {units:?}: {a:?} vs {b:?}")),
        }
    }
    Ok(format!("P/R/F1 on 200 random label sets, class weights, tf-idf and alpha ({compared} random cases, 4/9 and 0 hand cases) match loops within 1e-9"))
}

// ---------------------------------------------------------------- AC8

fn toy_turns() -> Vec<ConversationInstance> {
    let phrases = [
        "what a great day",
        "the best day ever",
        "oh great another monday",
        "i love waiting in line",
        "the best coffee in town",
        "what a great idea",
    ];
    let prep = Preprocessor::default();
    let mut rng = Rng::new(30);
    (0..30)
        .map(|i| {
            let a = *rng.choose(&phrases);
            let b = *rng.choose(&phrases);
            let text = if rng.bernoulli(0.5) { format!("{a}. {b}!") } else { a.to_string() };
            ConversationInstance {
                id: format!("t{i}"),
                prior: prep.turn(TurnRole::Prior, "context here.").unwrap(),
                current: prep.turn(TurnRole::Current, &text).unwrap(),
                succeeding: None,
                label: Label::from_index(i % 2),
            }
        })
        .collect()
}

fn lexicons_with_sentiment() -> LexiconSet {
    let mut lex = LexiconSet::builtin();
    if let Ok(Lexicon::Sentiment(s)) = parse_lexicon("toy", "great\tpositive\nlove\tpositive\nmonday\tnegative", LexiconKind::Sentiment) {
        lex.sentiment.push(s);
    }
    lex
}

fn ac8() -> Check {
    let turns = toy_turns();
    let lex = lexicons_with_sentiment();
    // Sliding-window oracle over every sentence of every current turn.
    let mut total: BTreeMap<String, usize> = BTreeMap::new();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for t in &turns {
        let mut seen = BTreeSet::new();
        for s in &t.current.sentences {
            for start in 0..s.len() {
                for n in 1..=3 {
                    if start + n > s.len() || (n == 1 && lex.stop_words.contains(&s[start])) {
                        continue;
                    }
                    let g = s[start..start + n].join(" ");
                    *total.entry(g.clone()).or_default() += 1;
                    seen.insert(g);
                }
            }
        }
        for g in seen {
            *df.entry(g).or_default() += 1;
        }
    }
    let expect_count: BTreeSet<String> = total.iter().filter(|(_, c)| **c >= 5).map(|(g, _)| g.clone()).collect();
    let expect_df: BTreeSet<String> = df.iter().filter(|(_, c)| **c >= 5).map(|(g, _)| g.clone()).collect();
    let discrete = FeaturePipeline::fit(
        &turns,
        &lex,
        BaselineConfig { kind: FeatureKind::Discrete, min_count: 5, ..BaselineConfig::default() },
    )
    .map_err(|e| e.to_string())?;
    ensure!(discrete.kept_ngrams() == &expect_count, "count-thresholded n-grams differ from the sliding window");
    let tfidf = FeaturePipeline::fit(
        &turns,
        &lex,
        BaselineConfig { kind: FeatureKind::Tfidf, min_df: 5, ..BaselineConfig::default() },
    )
    .map_err(|e| e.to_string())?;
    ensure!(tfidf.kept_ngrams() == &expect_df, "DF-thresholded n-grams differ from the sliding window");
    ensure!(tfidf.doc_freq() == &df, "document frequencies differ from the sliding window");
    let dropped = total.values().filter(|c| **c < 5).count();
    ensure!(dropped > 0 && !expect_count.is_empty(), "fixture does not exercise the threshold");
    for t in &turns {
        let feats: BTreeMap<String, f64> = discrete.named_features(t).map_err(|e| e.to_string())?.into_iter().collect();
        let mut local: BTreeMap<String, usize> = BTreeMap::new();
        for s in &t.current.sentences {
            for start in 0..s.len() {
                for n in 1..=3 {
                    if start + n <= s.len() && !(n == 1 && lex.stop_words.contains(&s[start])) {
                        *local.entry(s[start..start + n].join(" ")).or_default() += 1;
                    }
                }
            }
        }
        for (g, c) in local.iter().filter(|(g, _)| expect_count.contains(*g)) {
            let got = feats.get(&format!("ct:ng:{g}")).copied().unwrap_or(0.0);
            ensure!(got == *c as f64, "{}: count of '{g}' is {got}, expected {c}", t.id);
        }
    }

    // Separable fixture: feature 0 marks S, feature 1 marks NS, 2-5 are noise.
    let mut rng = Rng::new(8);
    let data: Vec<(SparseVector, Label)> = (0..60)
        .map(|i| {
            let y = Label::from_index(i % 2);
            let signal = if y == Label::Sarcastic { 0 } else { 1 };
            let mut pairs = vec![(signal, rng.uniform(0.5, 1.5))];
            for f in 2..6 {
                if rng.bernoulli(0.5) {
                    pairs.push((f, rng.uniform(-1.0, 1.0)));
                }
            }
            (SparseVector::from_pairs(pairs), y)
        })
        .collect();
    let names: Vec<String> = (0..6).map(|i| format!("f{i}")).collect();
    let hyper = LinearHyper { epochs: 30, ..LinearHyper::default() };
    let (model, _) = train_linear(&data, names.clone(), [1.0, 1.0], &hyper).map_err(|e| e.to_string())?;
    let correct = data.iter().filter(|(x, y)| predict_linear(&model, x).0 == *y).count();
    ensure!(correct == data.len(), "separable fixture: {correct} of {} correct", data.len());
    let imbalanced: Vec<_> = data.iter().filter(|(_, y)| *y == Label::NotSarcastic).cloned().chain(data.iter().take(6).cloned()).collect();
    let w = class_weights(&imbalanced.iter().map(|(_, y)| *y).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
    let (wmodel, _) = train_linear(&imbalanced, names, w, &hyper).map_err(|e| e.to_string())?;
    let wcorrect = imbalanced.iter().filter(|(x, y)| predict_linear(&wmodel, x).0 == *y).count();
    ensure!(wcorrect == imbalanced.len(), "weighted separable fixture: {wcorrect} of {} correct", imbalanced.len());

    // Equal weights reproduce the plain mean hinge loss.
    let lambda = 1e-3;
    let mut plain = 0.0;
    for (x, y) in &data {
        let s = if *y == Label::Sarcastic { 1.0 } else { -1.0 };
        let mut m = model.bias;
        for (i, v) in x.iter() {
            m += model.weights[i as usize] * v;
        }
        plain += (1.0 - s * m).max(0.0);
    }
    plain = plain / data.len() as f64 + 0.5 * lambda * model.weights.iter().map(|w| w * w).sum::<f64>();
    let weighted = hinge_objective(&model, &data, lambda);
    ensure!((weighted - plain).abs() < 1e-12, "equal-weight loss {weighted} vs unweighted {plain}");
    Ok(format!(
        "{} count-kept and {} DF-kept n-grams match the sliding window on 30 turns; separable fixtures 100%; equal-weight loss = unweighted ({plain:.6})",
        expect_count.len(),
        expect_df.len()
    ))
}

// ---------------------------------------------------------------- AC9

fn ac9() -> Check {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let data = fixtures.join("toy.jsonl");
    let conf = fixtures.join("toy.conf");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let args = [
            "sarc",
            "train",
            "--config",
            conf.to_str().unwrap(),
            "--data",
            data.to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ];
        let code = sarc_cli::run_with(args, &mut Vec::new());
        ensure!(code == 0, "train run {run} exited with {code}");
        outs.push(out);
    }
    for f in ["model.ckpt", "manifest.json", "metrics.json", "vocab.tsv", "splits.json"] {
        let a = std::fs::read(outs[0].join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(outs[1].join(f)).map_err(|e| e.to_string())?;
        ensure!(a == b, "{f} differs between the two runs");
    }
    Ok("two `train --seed 7` runs: checkpoint, manifest and metrics byte-identical".into())
}

// ---------------------------------------------------------------- AC10

fn ac10() -> Check {
    let (mut ctx_s, mut ct_s) = (Vec::new(), Vec::new());
    for seed in SEEDS {
        let spec = IncongruitySpec { seed, sarcastic_share: 0.2, ..IncongruitySpec::default() };
        let p = prepare_records(exact_mix(&spec, 400, 1600), seed);
        let n_s = p.train.iter().filter(|e| e.label == Label::Sarcastic).count();
        ensure!(4 * n_s == p.train.len() - n_s, "training split is not 4:1 ({n_s} of {})", p.train.len());
        ct_s.push(test_scores(&p, Architecture::Ct, ContextUse::None, seed)?.1);
        ctx_s.push(test_scores(&p, Architecture::AttnSent, ContextUse::Pt, seed)?.1);
    }
    let gain = 100.0 * (mean(&ctx_s) - mean(&ct_s));
    let detail = format!(
        "4:1 imbalance, S-class F1 attn_sent[pt] {} vs ct {} (seeds 0/1/2), mean gain {gain:.2} points",
        pct(&ctx_s),
        pct(&ct_s)
    );
    ensure!(gain >= 3.0, "{detail} < 3");
    Ok(detail)
}
