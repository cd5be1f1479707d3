use crate::error::{Error, Result};
use crate::nn::{softmax, softmax_backward, Matrix, ParamSet, Rng};

/// One-layer MLP `u_i = tanh(W h_i + b)` scored against a context vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionParams {
    pub w: Matrix,
    pub b: Matrix,
    /// Context vector, `rows(w) × 1`.
    pub u: Matrix,
}

impl AttentionParams {
    pub fn zeros(attn_dim: usize, input_dim: usize) -> Self {
        AttentionParams {
            w: Matrix::zeros(attn_dim, input_dim),
            b: Matrix::zeros(attn_dim, 1),
            u: Matrix::zeros(attn_dim, 1),
        }
    }

    /// `W` and the context vector uniform in `(-scale, scale)`, `b` zero.
    pub fn uniform(attn_dim: usize, input_dim: usize, scale: f64, rng: &mut Rng) -> Self {
        AttentionParams {
            w: Matrix::uniform(attn_dim, input_dim, -scale, scale, rng),
            b: Matrix::zeros(attn_dim, 1),
            u: Matrix::uniform(attn_dim, 1, -scale, scale, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }
}

impl ParamSet for AttentionParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![("w".into(), &self.w), ("b".into(), &self.b), ("u".into(), &self.u)]
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        vec![
            ("w".into(), &mut self.w),
            ("b".into(), &mut self.b),
            ("u".into(), &mut self.u),
        ]
    }
}

/// Forward values of one pooling, over unmasked positions only.
#[derive(Clone, Debug)]
pub struct AttnTrace {
    /// Indices of the unmasked annotations.
    pub valid: Vec<usize>,
    hidden: Vec<Vec<f64>>,
    /// Weights over `valid`.
    pub alpha: Vec<f64>,
}

impl AttnTrace {
    /// Weights over all positions, zero where masked.
    pub fn full_weights(&self, len: usize) -> Vec<f64> {
        let mut w = vec![0.0; len];
        for (k, &i) in self.valid.iter().enumerate() {
            w[i] = self.alpha[k];
        }
        w
    }
}

pub fn attention_forward(
    params: &AttentionParams,
    hs: &[Vec<f64>],
    mask: &[bool],
) -> Result<(Vec<f64>, AttnTrace)> {
    if hs.len() != mask.len() {
        return Err(Error::dim("attention mask", hs.len(), mask.len()));
    }
    let valid: Vec<usize> = (0..hs.len()).filter(|&i| mask[i]).collect();
    if valid.is_empty() {
        return Err(Error::Empty("attention over zero unmasked annotations"));
    }
    let dim = params.input_dim();
    let ctx = params.u.as_slice();
    let mut hidden = Vec::with_capacity(valid.len());
    let mut scores = Vec::with_capacity(valid.len());
    for &i in &valid {
        if hs[i].len() != dim {
            return Err(Error::dim("attention annotation", dim, hs[i].len()));
        }
        let mut u = params.w.matvec(&hs[i])?;
        for (x, b) in u.iter_mut().zip(params.b.as_slice()) {
            *x = (*x + b).tanh();
        }
        scores.push(u.iter().zip(ctx).map(|(a, b)| a * b).sum::<f64>());
        hidden.push(u);
    }
    let alpha = softmax(&scores)?;
    let mut v = vec![0.0; dim];
    for (k, &i) in valid.iter().enumerate() {
        for (o, h) in v.iter_mut().zip(&hs[i]) {
            *o += alpha[k] * h;
        }
    }
    Ok((v, AttnTrace { valid, hidden, alpha }))
}

/// Backward pass of [`attention_forward`]. Accumulates parameter gradients
/// and returns the gradient for every annotation (zero where masked).
pub fn attention_backward(
    params: &AttentionParams,
    hs: &[Vec<f64>],
    trace: &AttnTrace,
    dv: &[f64],
    grads: &mut AttentionParams,
) -> Vec<Vec<f64>> {
    let dim = params.input_dim();
    let mut dhs = vec![vec![0.0; dim]; hs.len()];
    let dalpha: Vec<f64> = trace
        .valid
        .iter()
        .map(|&i| hs[i].iter().zip(dv).map(|(a, b)| a * b).sum())
        .collect();
    let ds = softmax_backward(&trace.alpha, &dalpha);
    let ctx = params.u.as_slice().to_vec();
    for (k, &i) in trace.valid.iter().enumerate() {
        let u = &trace.hidden[k];
        for (o, g) in dhs[i].iter_mut().zip(dv) {
            *o += trace.alpha[k] * g;
        }
        for (gu, ui) in grads.u.as_mut_slice().iter_mut().zip(u) {
            *gu += ds[k] * ui;
        }
        let dz: Vec<f64> = u
            .iter()
            .zip(&ctx)
            .map(|(ui, c)| ds[k] * c * (1.0 - ui * ui))
            .collect();
        for (gb, d) in grads.b.as_mut_slice().iter_mut().zip(&dz) {
            *gb += d;
        }
        grads.w.add_outer(&dz, &hs[i]).expect("attention grad shape");
        params.w.matvec_t_acc(&dz, &mut dhs[i]).expect("attention grad shape");
    }
    dhs
}

/// Attention pooling `v = Σ α_i h_i` with `α = softmax(u_iᵀ u_s)` over the
/// unmasked annotations. Returns `v` and weights over all positions (zero
/// where masked).
pub fn attention_pool(params: &AttentionParams, hs: &[Vec<f64>], mask: &[bool]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (v, trace) = attention_forward(params, hs, mask)?;
    Ok((v, trace.full_weights(hs.len())))
}
