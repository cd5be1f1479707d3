use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Rng;
use crate::text::Label;

/// `N / (K · N_c)` for each class, indexed by [`Label::index`].
pub fn class_weights(labels: &[Label]) -> Result<[f64; 2]> {
    let mut counts = [0usize; 2];
    for l in labels {
        counts[l.index()] += 1;
    }
    if counts.iter().any(|c| *c == 0) {
        return Err(Error::Data(format!(
            "class weights need both classes (S = {}, NS = {})",
            counts[0], counts[1]
        )));
    }
    let n = labels.len() as f64;
    Ok([n / (2.0 * counts[0] as f64), n / (2.0 * counts[1] as f64)])
}

/// Harmonic mean with `F1 = 0` when `P + R = 0`.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `[S, NS]`.
    pub classes: Vec<ClassScores>,
    /// `confusion[gold][pred]`, indexed by [`Label::index`].
    pub confusion: [[usize; 2]; 2],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub n: usize,
}

impl EvalReport {
    pub fn class(&self, label: Label) -> &ClassScores {
        &self.classes[label.index()]
    }

    /// Fixed-width table, percentages with two decimals.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<6} {:>8} {:>8} {:>8} {:>8}", "class", "P", "R", "F1", "support");
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<6} {:>8.2} {:>8.2} {:>8.2} {:>8}",
                c.label.as_str(),
                100.0 * c.precision,
                100.0 * c.recall,
                100.0 * c.f1,
                c.support
            );
        }
        let _ = writeln!(
            s,
            "{:<6} {:>8.2} {:>8.2} {:>8.2} {:>8}",
            "macro",
            100.0 * self.macro_precision,
            100.0 * self.macro_recall,
            100.0 * self.macro_f1,
            self.n
        );
        let _ = writeln!(s, "accuracy {:.2}", 100.0 * self.accuracy);
        let _ = writeln!(s, "confusion (rows gold S/NS, cols pred S/NS): {:?}", self.confusion);
        s
    }
}

fn confusion(gold: &[Label], pred: &[Label]) -> [[usize; 2]; 2] {
    let mut m = [[0usize; 2]; 2];
    for (g, p) in gold.iter().zip(pred) {
        m[g.index()][p.index()] += 1;
    }
    m
}

fn report_from_confusion(m: [[usize; 2]; 2]) -> EvalReport {
    let n: usize = m.iter().flatten().sum();
    let classes: Vec<ClassScores> = Label::ALL
        .iter()
        .map(|&label| {
            let k = label.index();
            let o = 1 - k;
            let (tp, fp, fn_, tn) = (m[k][k], m[o][k], m[k][o], m[o][o]);
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            ClassScores {
                label,
                precision,
                recall,
                f1: f1(precision, recall),
                support: tp + fn_,
                tp,
                fp,
                fn_,
                tn,
            }
        })
        .collect();
    let mean = |f: fn(&ClassScores) -> f64| classes.iter().map(f).sum::<f64>() / classes.len() as f64;
    EvalReport {
        macro_precision: mean(|c| c.precision),
        macro_recall: mean(|c| c.recall),
        macro_f1: mean(|c| c.f1),
        accuracy: ratio(m[0][0] + m[1][1], n),
        confusion: m,
        n,
        classes,
    }
}

pub fn evaluate_predictions(gold: &[Label], pred: &[Label]) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::Empty("evaluation data"));
    }
    if gold.len() != pred.len() {
        return Err(Error::dim("evaluate_predictions", gold.len(), pred.len()));
    }
    Ok(report_from_confusion(confusion(gold, pred)))
}

fn macro_f1_of(m: [[usize; 2]; 2]) -> f64 {
    let f = |k: usize| {
        let o = 1 - k;
        f1(ratio(m[k][k], m[k][k] + m[o][k]), ratio(m[k][k], m[k][k] + m[k][o]))
    };
    (f(0) + f(1)) / 2.0
}

/// Two-sided paired bootstrap p-value for the macro-F1 difference of two
/// systems: the fraction of resamples whose difference deviates from the
/// observed one by at least the observed magnitude. Resample `r` draws from
/// its own RNG stream derived from `seed`.
pub fn paired_bootstrap(
    preds_a: &[Label],
    preds_b: &[Label],
    gold: &[Label],
    iters: usize,
    seed: u64,
) -> Result<f64> {
    if preds_a.len() != gold.len() || preds_b.len() != gold.len() {
        return Err(Error::dim(
            "paired_bootstrap",
            gold.len(),
            format!("{} and {}", preds_a.len(), preds_b.len()),
        ));
    }
    if gold.is_empty() {
        return Err(Error::Empty("bootstrap data"));
    }
    if iters == 0 {
        return Err(Error::Config("bootstrap iterations must be positive".into()));
    }
    let n = gold.len();
    let delta = macro_f1_of(confusion(gold, preds_a)) - macro_f1_of(confusion(gold, preds_b));
    let mut extreme = 0usize;
    for r in 0..iters {
        let mut rng = Rng::derive(seed, r as u64);
        let (mut ma, mut mb) = ([[0usize; 2]; 2], [[0usize; 2]; 2]);
        for _ in 0..n {
            let i = rng.below(n);
            ma[gold[i].index()][preds_a[i].index()] += 1;
            mb[gold[i].index()][preds_b[i].index()] += 1;
        }
        let d = macro_f1_of(ma) - macro_f1_of(mb);
        if (d - delta).abs() >= delta.abs() {
            extreme += 1;
        }
    }
    Ok(extreme as f64 / iters as f64)
}
