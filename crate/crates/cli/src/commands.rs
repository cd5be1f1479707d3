use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use sarc_core::analysis::{
    alpha_by_bucket, attention_annotation_overlap, load_annotations, render_bars, trigger_distribution, vote_counts,
    write_heatmaps, AnnotationSet, BucketAlpha, HeatmapEntry, OverlapReport, Selection,
};
use sarc_core::baseline::{predict_linear, train_linear, FeaturePipeline, SparseVector};
use sarc_core::lexicons::LexiconSet;
use sarc_core::model::{AttentionRecord, Checkpoint, ContextUse, Model, ModelParams};
use sarc_core::pipeline::{build_vocab, encode_all, select};
use sarc_core::text::{
    load_embeddings, load_dataset, parse_unlabeled, ConversationInstance, EncodedInstance, Label, PrepConfig,
    Preprocessor, TurnRole,
};
use sarc_core::train::{
    class_weights, evaluate_model, evaluate_predictions, stratified_split, EpochRecord, EvalReport, Splits,
};

use crate::data::{
    create_dir, data_path, io_err, json_bytes, part_indices, resolve_input, sha256_dir, sha256_file, sha256_hex, write_bytes,
    write_json, write_jsonl, write_stdout, ModelDir, SplitIds, CHECKPOINT_FILE, VOCAB_FILE,
};
use crate::manifest::{RunManifest, Timings};
use crate::{
    data_error, AnalyzeArgs, BaselineArgs, CliResult, Command, ConfigArgs, DataArgs, EvalArgs,
    FeaturesArgs, PredictArgs, PrepArgs, RunConfig, TrainArgs,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const SPLITS_FILE: &str = "splits.json";
pub const LINEAR_FILE: &str = "linear.model";

pub fn dispatch(cmd: Command, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Prep(a) => prep(a, stdout),
        Command::Train(a) => train(a, stdout),
        Command::Eval(a) => eval(a, stdout),
        Command::Predict(a) => predict(a, stdout),
        Command::Analyze(a) => analyze(a, stdout),
        Command::Features(a) => features(a, stdout),
        Command::Baseline(a) => baseline(a, stdout),
    }
}

fn build_config(args: &ConfigArgs) -> CliResult<RunConfig> {
    let mut c = RunConfig::default();
    if let Some(p) = &args.config {
        c.apply_file(p)?;
    }
    c.apply_overrides(&args.set)?;
    if let Some(s) = args.seed {
        c.set_seed(s);
    }
    Ok(c)
}

fn preprocessor(prep: PrepConfig) -> Preprocessor {
    Preprocessor {
        config: prep,
        ..Preprocessor::default()
    }
}

fn emit(stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    write_stdout(stdout, text.as_bytes())
}

/// A labeled dataset with its split; the split comes from `--splits` or
/// is drawn from the config's fractions and seed.
struct Dataset {
    data_path: PathBuf,
    splits_path: Option<PathBuf>,
    data: Vec<ConversationInstance>,
    splits: Splits,
}

impl Dataset {
    fn load(args: &DataArgs, cfg: &RunConfig) -> CliResult<Self> {
        let data_path = data_path(args)?;
        let data = load_dataset(&data_path, &preprocessor(cfg.prep))?;
        let splits_path = args.splits.as_deref().map(resolve_input);
        let splits = match &splits_path {
            Some(p) => SplitIds::load(p)?.to_splits(&data)?,
            None => {
                let labels: Vec<Label> = data.iter().map(|d| d.label).collect();
                stratified_split(&labels, &cfg.split)?
            }
        };
        if splits.train.is_empty() {
            return Err(data_error("the training split is empty"));
        }
        log::info!(
            "{} instances: {} train, {} dev, {} test",
            data.len(),
            splits.train.len(),
            splits.dev.len(),
            splits.test.len()
        );
        Ok(Dataset {
            data_path,
            splits_path,
            data,
            splits,
        })
    }

    fn part(&self, idx: &[usize]) -> Vec<ConversationInstance> {
        select(&self.data, idx)
    }

    fn input_hashes(&self) -> CliResult<BTreeMap<String, String>> {
        let mut m = BTreeMap::new();
        m.insert("data".to_string(), sha256_file(&self.data_path)?);
        if let Some(p) = &self.splits_path {
            m.insert("splits".to_string(), sha256_file(p)?);
        }
        Ok(m)
    }
}

fn prep(args: PrepArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = build_config(&args.cfg)?;
    cfg.validate()?;
    let ds = Dataset::load(&args.data, &cfg)?;
    let vocab = build_vocab(ds.splits.train.iter().map(|&i| &ds.data[i]), cfg.vocab_min_count);
    let encoded = encode_all(&ds.data, &vocab, &cfg.prep)?;
    create_dir(&args.out)?;
    vocab.save(args.out.join(VOCAB_FILE))?;
    write_json(&args.out.join(SPLITS_FILE), &SplitIds::from_splits(&ds.splits, &ds.data))?;
    write_jsonl(Some(&args.out.join("encoded.jsonl")), &encoded, stdout)?;
    let truncated = encoded
        .iter()
        .filter(|e| [Some(&e.prior), Some(&e.current), e.succeeding.as_ref()].into_iter().flatten().any(|t| t.truncated))
        .count();
    let summary = json!({
        "instances": ds.data.len(),
        "train": ds.splits.train.len(),
        "dev": ds.splits.dev.len(),
        "test": ds.splits.test.len(),
        "vocab_size": vocab.len(),
        "vocab_hash": vocab.hash(),
        "truncated_instances": truncated,
        "prep": cfg.prep,
        "vocab_min_count": cfg.vocab_min_count,
        "data_sha256": sha256_file(&ds.data_path)?,
    });
    write_json(&args.out.join("prep.json"), &summary)?;
    emit(stdout, &String::from_utf8_lossy(&json_bytes(&summary)?))
}

#[derive(Serialize)]
struct TrainMetrics<'a> {
    architecture: String,
    best_epoch: usize,
    class_weights: [f64; 2],
    history: &'a [EpochRecord],
    dev: Option<EvalReport>,
    test: Option<EvalReport>,
}

fn train(args: TrainArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut timings = Timings::default();
    let mut cfg = build_config(&args.cfg)?;
    if let Some(a) = &args.arch {
        cfg.set("arch", a)?;
    }
    if let Some(c) = &args.context {
        cfg.set("context", c)?;
    }
    let ds = Dataset::load(&args.data, &cfg)?;
    let vocab = build_vocab(ds.splits.train.iter().map(|&i| &ds.data[i]), cfg.vocab_min_count);
    let mut inputs = ds.input_hashes()?;
    let table = match &args.embeddings {
        Some(p) => {
            let p = resolve_input(p);
            let t = load_embeddings(&p, &vocab, cfg.hyper.seed)?;
            if t.dim != cfg.model.embedding_dim {
                log::warn!("embedding_dim {} replaced by the table's {}", cfg.model.embedding_dim, t.dim);
                cfg.model.embedding_dim = t.dim;
            }
            log::info!("pretrained vectors: {} found, {} out of vocabulary", t.oov.found, t.oov.oov);
            inputs.insert("embeddings".to_string(), sha256_file(&p)?);
            Some(t)
        }
        None => None,
    };
    cfg.validate()?;
    let tr = encode_all(&ds.part(&ds.splits.train), &vocab, &cfg.prep)?;
    let dv = encode_all(&ds.part(&ds.splits.dev), &vocab, &cfg.prep)?;
    let te = encode_all(&ds.part(&ds.splits.test), &vocab, &cfg.prep)?;
    timings.mark("load");

    let init = ModelParams::init(&cfg.model, vocab.len(), table.as_ref(), cfg.hyper.seed)?;
    log::info!("training {} for {} epochs", cfg.model, cfg.hyper.epochs);
    let outcome = sarc_core::train::train_model(&cfg.model, init, &tr, &dv, &cfg.hyper)?;
    timings.mark("train");

    let score = |d: &[EncodedInstance]| -> CliResult<Option<EvalReport>> {
        if d.is_empty() {
            Ok(None)
        } else {
            Ok(Some(evaluate_model(&cfg.model, &outcome.best, d)?))
        }
    };
    let metrics = TrainMetrics {
        architecture: cfg.model.to_string(),
        best_epoch: outcome.best_epoch,
        class_weights: outcome.class_weights,
        history: &outcome.history,
        dev: score(&dv)?,
        test: score(&te)?,
    };
    timings.mark("eval");

    let checkpoint = Checkpoint {
        config: cfg.model.clone(),
        vocab_hash: vocab.hash(),
        meta: json!({
            "prep": cfg.prep,
            "hyper": cfg.hyper,
            "vocab_min_count": cfg.vocab_min_count,
            "best_epoch": outcome.best_epoch,
        }),
        params: outcome.best.clone(),
    };
    let ckpt_bytes = checkpoint.to_bytes()?;
    let metrics_bytes = json_bytes(&metrics)?;
    let splits_bytes = json_bytes(&SplitIds::from_splits(&ds.splits, &ds.data))?;
    create_dir(&args.out)?;
    write_bytes(&args.out.join(CHECKPOINT_FILE), &ckpt_bytes)?;
    vocab.save(args.out.join(VOCAB_FILE))?;
    write_bytes(&args.out.join(METRICS_FILE), &metrics_bytes)?;
    write_bytes(&args.out.join(SPLITS_FILE), &splits_bytes)?;

    let ckpt_sha = sha256_hex(&ckpt_bytes);
    let mut manifest = RunManifest::new("train", cfg.hyper.seed, cfg.to_text(), &ckpt_sha);
    manifest.inputs = inputs;
    manifest.artifacts.insert(CHECKPOINT_FILE.into(), ckpt_sha);
    manifest.artifacts.insert(VOCAB_FILE.into(), sha256_file(&args.out.join(VOCAB_FILE))?);
    manifest.artifacts.insert(METRICS_FILE.into(), sha256_hex(&metrics_bytes));
    manifest.artifacts.insert(SPLITS_FILE.into(), sha256_hex(&splits_bytes));
    write_json(&args.out.join(MANIFEST_FILE), &manifest)?;
    write_json(&args.out.join(TIMINGS_FILE), &timings.finish())?;

    let shown = metrics.test.as_ref().map(|r| ("test", r)).or(metrics.dev.as_ref().map(|r| ("dev", r)));
    match shown {
        Some((name, r)) => emit(stdout, &format!("{} best epoch {} ({name})\n{}", metrics.architecture, metrics.best_epoch, r.table())),
        None => emit(stdout, &format!("{} trained for {} epochs\n", metrics.architecture, cfg.hyper.epochs)),
    }
}

/// Data read against a trained model: instances (labels optional), their
/// encodings and the selected part.
struct Scored {
    instances: Vec<ConversationInstance>,
    gold: Vec<Option<Label>>,
    encoded: Vec<EncodedInstance>,
}

fn load_for_model(dir: &ModelDir, args: &DataArgs, part: Option<crate::Part>) -> CliResult<Scored> {
    let path = data_path(args)?;
    let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let rows = parse_unlabeled(&path.display().to_string(), &text, &preprocessor(dir.prep))?;
    let (all, gold_all): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let splits = match &args.splits {
        Some(p) => Some(SplitIds::load(&resolve_input(p))?.to_splits(&all)?),
        None => None,
    };
    let idx = part_indices(splits.as_ref(), part, all.len())?;
    if idx.is_empty() {
        return Err(data_error("no instances in the selected part"));
    }
    let instances = select(&all, &idx);
    let gold = select(&gold_all, &idx);
    let encoded = encode_all(&instances, &dir.vocab, &dir.prep)?;
    Ok(Scored {
        instances,
        gold,
        encoded,
    })
}

fn eval(args: EvalArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let dir = ModelDir::load(&args.model)?;
    let s = load_for_model(&dir, &args.data, args.part)?;
    let gold: Vec<Label> = s
        .gold
        .iter()
        .zip(&s.instances)
        .map(|(g, i)| g.ok_or_else(|| data_error(format!("instance {} has no label", i.id))))
        .collect::<CliResult<_>>()?;
    let model = Model::new(dir.checkpoint.config.clone(), dir.checkpoint.params);
    let pred: Vec<Label> = model.predict_all(&s.encoded)?.into_iter().map(|p| p.label).collect();
    let report = evaluate_predictions(&gold, &pred)?;
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    emit(stdout, &format!("{}\n{}", model.config, report.table()))
}

#[derive(Serialize)]
struct PredictionRow {
    id: String,
    label: Label,
    prob_s: f64,
    prob_ns: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gold: Option<Label>,
}

fn predict(args: PredictArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let dir = ModelDir::load(&args.model)?;
    let s = load_for_model(&dir, &args.data, args.part)?;
    let model = Model::new(dir.checkpoint.config.clone(), dir.checkpoint.params);
    let rows: Vec<PredictionRow> = model
        .predict_all(&s.encoded)?
        .into_iter()
        .zip(s.instances.iter().zip(&s.gold))
        .map(|(p, (inst, gold))| PredictionRow {
            id: inst.id.clone(),
            label: p.label,
            prob_s: p.probs[0],
            prob_ns: p.probs[1],
            gold: *gold,
        })
        .collect();
    write_jsonl(args.out.as_deref(), &rows, stdout)
}

#[derive(Serialize)]
struct AttentionRow<'a> {
    id: &'a str,
    label: Label,
    prob_s: f64,
    attention: &'a AttentionRecord,
}

fn shown_sentences(inst: &ConversationInstance, role: TurnRole, max_sents: usize) -> Vec<String> {
    inst.turn(role)
        .map(|t| {
            t.sentences
                .iter()
                .filter(|s| !s.is_empty())
                .take(max_sents)
                .map(|s| s.join(" "))
                .collect()
        })
        .unwrap_or_default()
}

/// Which annotation each heatmap role shows as votes.
fn vote_source(role: TurnRole) -> Option<(u8, Selection)> {
    match role {
        TurnRole::Prior => Some((1, Selection::Triggers)),
        TurnRole::Current => Some((2, Selection::CurrentSentence)),
        TurnRole::Succeeding => None,
    }
}

/// Overlap comparisons: (name, task, what annotators selected, turn).
const OVERLAPS: [(&str, u8, Selection, TurnRole); 3] = [
    ("task1_prior_triggers", 1, Selection::Triggers, TurnRole::Prior),
    ("task2_current_sentence", 2, Selection::CurrentSentence, TurnRole::Current),
    ("task2_prior_triggers", 2, Selection::Triggers, TurnRole::Prior),
];

fn analyze(args: AnalyzeArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let dir = ModelDir::load(&args.model)?;
    let config = dir.checkpoint.config.clone();
    if !config.architecture.has_attention() {
        return Err(data_error(format!(
            "checkpoint model {config} has no attention; analyze needs an attention model"
        )));
    }
    let annotations = match &args.annotations {
        Some(p) => Some(load_annotations(&resolve_input(p))?),
        None => None,
    };
    let s = load_for_model(&dir, &args.data, args.part)?;
    let model = Model::new(config.clone(), dir.checkpoint.params);
    let preds = model.predict_all(&s.encoded)?;
    create_dir(&args.out)?;

    let rows: Vec<AttentionRow> = preds
        .iter()
        .zip(&s.instances)
        .map(|(p, i)| AttentionRow {
            id: &i.id,
            label: p.label,
            prob_s: p.probs[0],
            attention: &p.attention,
        })
        .collect();
    write_jsonl(Some(&args.out.join("attention.jsonl")), &rows, stdout)?;

    let sentence_counts: BTreeMap<&str, (usize, usize)> = s
        .encoded
        .iter()
        .map(|e| (e.id.as_str(), (e.prior.num_sentences(), e.current.num_sentences())))
        .collect();
    if let Some(ann) = &annotations {
        ann.check_ranges(|id, what| {
            sentence_counts.get(id).map(|&(p, c)| match what {
                Selection::Triggers => p,
                Selection::CurrentSentence => c,
            })
        })?;
    }

    let mut heatmaps = Vec::new();
    for (p, inst) in preds.iter().zip(&s.instances) {
        for role in [TurnRole::Prior, TurnRole::Current, TurnRole::Succeeding] {
            let Some(weights) = p.attention.sentence_weights(role) else { continue };
            let sentences = shown_sentences(inst, role, dir.prep.max_sents);
            let votes = match (&annotations, vote_source(role)) {
                (Some(ann), Some((task, what))) => ann.task(task).get(inst.id.as_str()).map(|list| {
                    let sels: Vec<Vec<usize>> = list.iter().map(|a| a.selected(what)).collect();
                    let counts = vote_counts(&sels);
                    (0..sentences.len()).map(|k| counts.get(&k).copied().unwrap_or(0)).collect()
                }),
                _ => None,
            };
            heatmaps.push(HeatmapEntry {
                instance_id: inst.id.clone(),
                role,
                weights: weights[..sentences.len().min(weights.len())].to_vec(),
                sentences,
                votes,
            });
        }
    }
    write_heatmaps(&args.out.join("heatmaps.jsonl"), &heatmaps)?;
    let bars: String = heatmaps.iter().map(|h| render_bars(h, 40)).collect::<Vec<_>>().join("\n");
    write_bytes(&args.out.join("heatmaps.txt"), bars.as_bytes())?;

    let mut summary = json!({
        "model": config.to_string(),
        "instances": s.instances.len(),
        "heatmaps": heatmaps.len(),
    });
    if let Some(ann) = &annotations {
        let records: BTreeMap<String, AttentionRecord> = preds
            .iter()
            .zip(&s.instances)
            .map(|(p, i)| (i.id.clone(), p.attention.clone()))
            .collect();
        let overlaps = overlap_reports(&records, ann)?;
        if overlaps.is_empty() {
            return Err(data_error(format!(
                "checkpoint model {config} has no sentence-level attention over the annotated turns"
            )));
        }
        let alpha = agreement(ann, &sentence_counts)?;
        write_json(&args.out.join("overlap.json"), &overlaps)?;
        write_json(&args.out.join("alpha.json"), &alpha)?;
        write_json(&args.out.join("triggers.json"), &trigger_distribution(ann))?;
        let pct: BTreeMap<&str, f64> = overlaps.iter().map(|(k, r)| (*k, r.percentage)).collect();
        summary["overlap_percentage"] = json!(pct);
    }
    emit(stdout, &String::from_utf8_lossy(&json_bytes(&summary)?))
}

fn overlap_reports(
    records: &BTreeMap<String, AttentionRecord>,
    ann: &AnnotationSet,
) -> CliResult<BTreeMap<&'static str, OverlapReport>> {
    let mut out = BTreeMap::new();
    for (name, task, what, role) in OVERLAPS {
        let annotated = ann.task(task);
        if annotated.is_empty() || annotated.values().all(|l| l.iter().all(|a| a.selected(what).is_empty())) {
            continue;
        }
        let has_block = annotated
            .keys()
            .filter_map(|id| records.get(*id))
            .any(|r| r.sentence_block(role).is_some());
        if !has_block {
            continue;
        }
        out.insert(name, attention_annotation_overlap(records, ann, task, what, role)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Agreement {
    task1_triggers: Vec<BucketAlpha>,
    task2_current_sentence: Vec<BucketAlpha>,
}

fn agreement(ann: &AnnotationSet, counts: &BTreeMap<&str, (usize, usize)>) -> CliResult<Agreement> {
    let units = |task: u8, what: Selection| -> CliResult<Vec<BucketAlpha>> {
        let u = sarc_core::analysis::alpha_units(ann, task, what, |id| {
            counts.get(id).map(|&(p, c)| if what == Selection::Triggers { p } else { c })
        })?;
        Ok(alpha_by_bucket(&u))
    };
    Ok(Agreement {
        task1_triggers: units(1, Selection::Triggers)?,
        task2_current_sentence: units(2, Selection::CurrentSentence)?,
    })
}

/// Config, lexicons and a fitted feature pipeline for the baseline commands.
fn fitted_pipeline(
    cfg_args: &ConfigArgs,
    data_args: &DataArgs,
    context: Option<&str>,
    lexicons: Option<&Path>,
) -> CliResult<(RunConfig, Dataset, FeaturePipeline, BTreeMap<String, String>)> {
    let mut cfg = build_config(cfg_args)?;
    if let Some(c) = context {
        cfg.set("context", c)?;
    }
    cfg.baseline.roles = cfg.model.context.roles();
    let ds = Dataset::load(data_args, &cfg)?;
    let mut inputs = ds.input_hashes()?;
    let lex = match lexicons {
        Some(p) => {
            let p = resolve_input(p);
            let set = LexiconSet::load_dir(&p)?;
            inputs.insert("lexicons".into(), sha256_dir(&p)?);
            set
        }
        None => LexiconSet::builtin(),
    };
    let pipeline = FeaturePipeline::fit(&ds.part(&ds.splits.train), &lex, cfg.baseline.clone())?;
    log::info!("{} features fitted", pipeline.index.names().len());
    Ok((cfg, ds, pipeline, inputs))
}

#[derive(Serialize)]
struct FeatureRow<'a> {
    id: &'a str,
    label: Label,
    split: &'static str,
    features: BTreeMap<String, f64>,
}

fn split_names(splits: &Splits, n: usize) -> Vec<&'static str> {
    let mut names = vec!["unused"; n];
    for (part, name) in [(&splits.train, "train"), (&splits.dev, "dev"), (&splits.test, "test")] {
        for &i in part {
            names[i] = name;
        }
    }
    names
}

fn features(args: FeaturesArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (_, ds, pipeline, _) = fitted_pipeline(&args.cfg, &args.data, args.context.as_deref(), args.lexicons.as_deref())?;
    let names = split_names(&ds.splits, ds.data.len());
    let rows: Vec<FeatureRow> = ds
        .data
        .iter()
        .zip(names)
        .map(|(inst, split)| {
            Ok(FeatureRow {
                id: &inst.id,
                label: inst.label,
                split,
                features: pipeline.named_features(inst)?.into_iter().collect(),
            })
        })
        .collect::<CliResult<_>>()?;
    write_jsonl(args.out.as_deref(), &rows, stdout)
}

#[derive(Serialize)]
struct BaselineMetrics {
    features: usize,
    class_weights: [f64; 2],
    objective: Vec<f64>,
    dev: Option<EvalReport>,
    test: Option<EvalReport>,
}

fn baseline(args: BaselineArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let mut timings = Timings::default();
    let (cfg, ds, pipeline, inputs) =
        fitted_pipeline(&args.cfg, &args.data, args.context.as_deref(), args.lexicons.as_deref())?;
    let vectors = |idx: &[usize]| -> CliResult<Vec<(SparseVector, Label)>> {
        idx.iter()
            .map(|&i| Ok((pipeline.transform(&ds.data[i])?, ds.data[i].label)))
            .collect()
    };
    let train = vectors(&ds.splits.train)?;
    let weights = if cfg.hyper.class_weighting {
        class_weights(&train.iter().map(|(_, y)| *y).collect::<Vec<_>>())?
    } else {
        [1.0, 1.0]
    };
    timings.mark("features");
    let (model, objective) = train_linear(&train, pipeline.index.names().to_vec(), weights, &cfg.linear)?;
    timings.mark("train");
    let score = |idx: &[usize]| -> CliResult<Option<EvalReport>> {
        if idx.is_empty() {
            return Ok(None);
        }
        let data = vectors(idx)?;
        let gold: Vec<Label> = data.iter().map(|(_, y)| *y).collect();
        let pred: Vec<Label> = data.iter().map(|(x, _)| predict_linear(&model, x).0).collect();
        Ok(Some(evaluate_predictions(&gold, &pred)?))
    };
    let metrics = BaselineMetrics {
        features: model.dim(),
        class_weights: weights,
        objective,
        dev: score(&ds.splits.dev)?,
        test: score(&ds.splits.test)?,
    };
    timings.mark("eval");

    create_dir(&args.out)?;
    let model_bytes = model.to_text().into_bytes();
    let metrics_bytes = json_bytes(&metrics)?;
    write_bytes(&args.out.join(LINEAR_FILE), &model_bytes)?;
    write_bytes(&args.out.join(METRICS_FILE), &metrics_bytes)?;
    let model_sha = sha256_hex(&model_bytes);
    let mut manifest = RunManifest::new("baseline", cfg.linear.seed, cfg.to_text(), &model_sha);
    manifest.inputs = inputs;
    manifest.artifacts.insert(LINEAR_FILE.into(), model_sha);
    manifest.artifacts.insert(METRICS_FILE.into(), sha256_hex(&metrics_bytes));
    write_json(&args.out.join(MANIFEST_FILE), &manifest)?;
    write_json(&args.out.join(TIMINGS_FILE), &timings.finish())?;

    let context = if cfg.model.context == ContextUse::None {
        "ct".to_string()
    } else {
        format!("ct+{}", cfg.model.context)
    };
    match metrics.test.as_ref().or(metrics.dev.as_ref()) {
        Some(r) => emit(stdout, &format!("linear baseline [{context}], {} features\n{}", metrics.features, r.table())),
        None => emit(stdout, &format!("linear baseline [{context}], {} features\n", metrics.features)),
    }
}
