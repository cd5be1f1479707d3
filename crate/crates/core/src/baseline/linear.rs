use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SparseVector;
use crate::error::{Error, Result};
use crate::nn::Rng;
use crate::text::Label;

const FORMAT_HEADER: &str = "sarc-linear-model v1";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearHyper {
    pub epochs: usize,
    pub lambda: f64,
    /// Initial step size of `η_t = η0 / (1 + λ·η0·t)`.
    pub eta0: f64,
    pub seed: u64,
}

impl Default for LinearHyper {
    fn default() -> Self {
        LinearHyper {
            epochs: 20,
            lambda: 1e-4,
            eta0: 0.1,
            seed: 0,
        }
    }
}

/// Weights over a frozen feature index plus an unregularized bias.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub class_weights: [f64; 2],
}

fn sign(label: Label) -> f64 {
    match label {
        Label::Sarcastic => 1.0,
        Label::NotSarcastic => -1.0,
    }
}

impl LinearModel {
    pub fn zeros(feature_names: Vec<String>, class_weights: [f64; 2]) -> Self {
        LinearModel {
            weights: vec![0.0; feature_names.len()],
            feature_names,
            bias: 0.0,
            class_weights,
        }
    }

    /// Number of parameters: one weight per feature plus the bias.
    pub fn dim(&self) -> usize {
        self.weights.len() + 1
    }

    pub fn margin(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{FORMAT_HEADER}\nbias\t{:?}\nclass_weights\t{:?}\t{:?}\n",
            self.bias, self.class_weights[0], self.class_weights[1]
        );
        for (n, w) in self.feature_names.iter().zip(&self.weights) {
            s.push_str(&format!("{n}\t{w:?}\n"));
        }
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&path.display().to_string(), &text)
    }

    pub fn from_text(src: &str, text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.first() != Some(&FORMAT_HEADER) {
            return Err(Error::parse(src, 1, format!("expected header '{FORMAT_HEADER}'")));
        }
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::parse(src, line, format!("bad number '{s}'")))
        };
        let bias = match lines.get(1).and_then(|l| l.strip_prefix("bias\t")) {
            Some(v) => num(v, 2)?,
            None => return Err(Error::parse(src, 2, "expected bias line")),
        };
        let class_weights = match lines.get(2).and_then(|l| l.strip_prefix("class_weights\t")) {
            Some(v) => match v.split_once('\t') {
                Some((a, b)) => [num(a, 3)?, num(b, 3)?],
                None => return Err(Error::parse(src, 3, "expected two class weights")),
            },
            None => return Err(Error::parse(src, 3, "expected class_weights line")),
        };
        let mut feature_names = Vec::new();
        let mut weights = Vec::new();
        for (i, line) in lines.iter().enumerate().skip(3) {
            let (name, w) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(src, i + 1, "expected name<TAB>weight"))?;
            feature_names.push(name.to_string());
            weights.push(num(w, i + 1)?);
        }
        Ok(LinearModel {
            feature_names,
            weights,
            bias,
            class_weights,
        })
    }
}

/// S iff the margin `wᵀx + b` is positive.
pub fn predict_linear(model: &LinearModel, x: &SparseVector) -> (Label, f64) {
    let m = model.margin(x);
    (if m > 0.0 { Label::Sarcastic } else { Label::NotSarcastic }, m)
}

/// Mean class-weighted hinge loss plus `λ/2 ‖w‖²` (bias unregularized).
pub fn hinge_objective(model: &LinearModel, data: &[(SparseVector, Label)], lambda: f64) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let loss: f64 = data
        .iter()
        .map(|(x, y)| model.class_weights[y.index()] * (1.0 - sign(*y) * model.margin(x)).max(0.0))
        .sum();
    let reg: f64 = model.weights.iter().map(|w| w * w).sum();
    loss / data.len() as f64 + 0.5 * lambda * reg
}

/// Primal hinge-loss SGD with L2, seeded shuffling each epoch. Returns the
/// model and the full-data objective after every epoch.
pub fn train_linear(
    data: &[(SparseVector, Label)],
    feature_names: Vec<String>,
    class_weights: [f64; 2],
    hyper: &LinearHyper,
) -> Result<(LinearModel, Vec<f64>)> {
    if data.is_empty() {
        return Err(Error::Empty("linear training data"));
    }
    if !data.iter().any(|(_, y)| *y == Label::Sarcastic) || !data.iter().any(|(_, y)| *y == Label::NotSarcastic) {
        return Err(Error::Data("linear training data contains a single class".into()));
    }
    if hyper.eta0 <= 0.0 || hyper.lambda < 0.0 {
        return Err(Error::Config("eta0 must be positive and lambda non-negative".into()));
    }
    let dim = feature_names.len();
    if let Some((x, _)) = data.iter().find(|(x, _)| x.iter().any(|(i, _)| i as usize >= dim)) {
        return Err(Error::dim("train_linear", dim, x.iter().map(|(i, _)| i).max().unwrap_or(0) + 1));
    }

    let mut model = LinearModel::zeros(feature_names, class_weights);
    // w = scale · v keeps the per-step shrink O(1).
    let mut v = vec![0.0; dim];
    let mut scale = 1.0;
    let mut rng = Rng::new(hyper.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut t = 0u64;
    let mut history = Vec::with_capacity(hyper.epochs);
    for _ in 0..hyper.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            let (x, y) = &data[i];
            let eta = hyper.eta0 / (1.0 + hyper.lambda * hyper.eta0 * t as f64);
            let ys = sign(*y);
            let margin = scale * x.dot(&v) + model.bias;
            scale *= 1.0 - eta * hyper.lambda;
            if ys * margin < 1.0 {
                let step = eta * class_weights[y.index()] * ys;
                for (j, xj) in x.iter() {
                    v[j as usize] += step * xj / scale;
                }
                model.bias += step;
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|vj| *vj *= scale);
                scale = 1.0;
            }
            t += 1;
        }
        model.weights.iter_mut().zip(&v).for_each(|(w, vj)| *w = scale * vj);
        let obj = hinge_objective(&model, data, hyper.lambda);
        if !obj.is_finite() {
            return Err(Error::Diverged {
                epoch: history.len(),
                batch: 0,
                loss: obj,
            });
        }
        history.push(obj);
    }
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::class_weights;

    fn toy() -> Vec<(SparseVector, Label)> {
        let pts = [
            (2.0, 1.0, Label::Sarcastic),
            (1.5, 2.0, Label::Sarcastic),
            (3.0, 0.5, Label::Sarcastic),
            (2.5, 2.5, Label::Sarcastic),
            (-1.0, -2.0, Label::NotSarcastic),
            (-2.0, -0.5, Label::NotSarcastic),
            (-0.5, -1.5, Label::NotSarcastic),
            (-1.5, -1.0, Label::NotSarcastic),
        ];
        pts.iter()
            .map(|(a, b, y)| (SparseVector::from_pairs([(0, *a), (1, *b)]), *y))
            .collect()
    }

    fn names() -> Vec<String> {
        vec!["x0".into(), "x1".into()]
    }

    #[test]
    fn separable_toy_fits_perfectly() {
        let data = toy();
        let (m, _) = train_linear(&data, names(), [1.0, 1.0], &LinearHyper::default()).unwrap();
        assert_eq!(m.dim(), 3);
        for (x, y) in &data {
            assert_eq!(predict_linear(&m, x).0, *y);
        }
    }

    #[test]
    fn objective_decreases_by_epoch() {
        let hyper = LinearHyper {
            epochs: 15,
            lambda: 1e-2,
            eta0: 0.01,
            seed: 3,
        };
        let (_, hist) = train_linear(&toy(), names(), [1.0, 1.0], &hyper).unwrap();
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{hist:?}");
        }
    }

    #[test]
    fn deterministic_and_single_class_error() {
        let h = LinearHyper::default();
        let a = train_linear(&toy(), names(), [1.0, 1.0], &h).unwrap();
        let b = train_linear(&toy(), names(), [1.0, 1.0], &h).unwrap();
        assert_eq!(a, b);
        let one: Vec<_> = toy().into_iter().filter(|(_, y)| *y == Label::Sarcastic).collect();
        assert!(matches!(train_linear(&one, names(), [1.0, 1.0], &h), Err(Error::Data(_))));
    }

    #[test]
    fn imbalance_weights() {
        let mut labels = vec![Label::Sarcastic; 20];
        labels.extend(vec![Label::NotSarcastic; 80]);
        assert_eq!(class_weights(&labels).unwrap(), [2.5, 0.625]);
    }

    #[test]
    fn equal_weights_reduce_to_unweighted_objective() {
        let data = toy();
        let mut m = LinearModel::zeros(names(), [1.0, 1.0]);
        m.weights = vec![0.3, -0.2];
        m.bias = 0.1;
        let lambda = 0.05;
        let unweighted = data
            .iter()
            .map(|(x, y)| {
                let s = if *y == Label::Sarcastic { 1.0 } else { -1.0 };
                (1.0 - s * (0.3 * x.get(0) - 0.2 * x.get(1) + 0.1)).max(0.0)
            })
            .sum::<f64>()
            / data.len() as f64
            + 0.5 * lambda * (0.09 + 0.04);
        assert!((hinge_objective(&m, &data, lambda) - unweighted).abs() < 1e-12);
    }

    #[test]
    fn predictions_from_bias_and_margin_oracle() {
        let mut m = LinearModel::zeros(vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()], [1.0, 1.0]);
        m.bias = 0.5;
        assert_eq!(predict_linear(&m, &SparseVector::from_pairs([(1, 3.0)])).0, Label::Sarcastic);
        assert_eq!(predict_linear(&m, &SparseVector::new()).0, Label::Sarcastic);
        m.bias = -0.5;
        assert_eq!(predict_linear(&m, &SparseVector::new()).0, Label::NotSarcastic);
        m.weights = vec![0.5, -1.0, 2.0, 0.25, 3.0];
        let x = SparseVector::from_pairs([(0, 1.0), (1, 2.0), (2, -1.0), (3, 4.0), (4, 0.5)]);
        let brute = 0.5 * 1.0 + -1.0 * 2.0 + 2.0 * -1.0 + 0.25 * 4.0 + 3.0 * 0.5 - 0.5;
        assert!((predict_linear(&m, &x).1 - brute).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip() {
        let (m, _) = train_linear(&toy(), names(), [1.0, 1.0], &LinearHyper::default()).unwrap();
        let back = LinearModel::from_text("m", &m.to_text()).unwrap();
        assert_eq!(m, back);
        assert!(LinearModel::from_text("m", "garbage").is_err());
    }
}
