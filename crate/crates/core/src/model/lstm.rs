use crate::error::{Error, Result};
use crate::nn::{sigmoid, Matrix, ParamSet, Rng};

/// Gate weights over the concatenation `[h_{t-1}, x_t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w_i: Matrix,
    pub w_f: Matrix,
    pub w_o: Matrix,
    pub w_c: Matrix,
    pub b_i: Matrix,
    pub b_f: Matrix,
    pub b_o: Matrix,
    pub b_c: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Values of one step needed by the backward pass.
#[derive(Clone, Debug)]
pub struct StepCache {
    hx: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    o: Vec<f64>,
    g: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(hidden: usize, input: usize) -> Self {
        let w = || Matrix::zeros(hidden, hidden + input);
        let b = || Matrix::zeros(hidden, 1);
        LstmParams {
            w_i: w(),
            w_f: w(),
            w_o: w(),
            w_c: w(),
            b_i: b(),
            b_f: b(),
            b_o: b(),
            b_c: b(),
        }
    }

    /// Weights uniform in `(-scale, scale)`, biases zero.
    pub fn uniform(hidden: usize, input: usize, scale: f64, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(hidden, input);
        for m in [&mut p.w_i, &mut p.w_f, &mut p.w_o, &mut p.w_c] {
            *m = Matrix::uniform(hidden, hidden + input, -scale, scale, rng);
        }
        p
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_i.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_i.cols() - self.w_i.rows()
    }

    fn check(&self, prev: &LstmState, x: &[f64]) -> Result<()> {
        let h = self.hidden_dim();
        if prev.h.len() != h || prev.c.len() != h {
            return Err(Error::dim("lstm_step state", h, format!("h {} / c {}", prev.h.len(), prev.c.len())));
        }
        if x.len() != self.input_dim() {
            return Err(Error::dim("lstm_step input", self.input_dim(), x.len()));
        }
        Ok(())
    }

    fn gate(&self, w: &Matrix, b: &Matrix, hx: &[f64], r: usize) -> f64 {
        w.row(r).iter().zip(hx).map(|(a, b)| a * b).sum::<f64>() + b.as_slice()[r]
    }

    pub(crate) fn step_cached(&self, prev: &LstmState, x: &[f64]) -> Result<(LstmState, StepCache)> {
        self.check(prev, x)?;
        let hd = self.hidden_dim();
        let mut hx = Vec::with_capacity(hd + x.len());
        hx.extend_from_slice(&prev.h);
        hx.extend_from_slice(x);
        let mut cache = StepCache {
            i: vec![0.0; hd],
            f: vec![0.0; hd],
            o: vec![0.0; hd],
            g: vec![0.0; hd],
            c_prev: prev.c.clone(),
            tanh_c: vec![0.0; hd],
            hx,
        };
        let mut next = LstmState::zeros(hd);
        for r in 0..hd {
            let i = sigmoid(self.gate(&self.w_i, &self.b_i, &cache.hx, r));
            let f = sigmoid(self.gate(&self.w_f, &self.b_f, &cache.hx, r));
            let o = sigmoid(self.gate(&self.w_o, &self.b_o, &cache.hx, r));
            let g = self.gate(&self.w_c, &self.b_c, &cache.hx, r).tanh();
            let c = f * prev.c[r] + i * g;
            let tc = c.tanh();
            next.c[r] = c;
            next.h[r] = o * tc;
            cache.i[r] = i;
            cache.f[r] = f;
            cache.o[r] = o;
            cache.g[r] = g;
            cache.tanh_c[r] = tc;
        }
        Ok((next, cache))
    }

    /// Backward pass of one step. Accumulates parameter gradients into
    /// `grads` and returns `(dh_prev, dc_prev, dx)`.
    pub(crate) fn step_backward(
        &self,
        cache: &StepCache,
        dh: &[f64],
        dc: &[f64],
        grads: &mut LstmParams,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hd = self.hidden_dim();
        let mut dhx = vec![0.0; cache.hx.len()];
        let mut dc_prev = vec![0.0; hd];
        let blocks = [
            (&self.w_i, 0usize),
            (&self.w_f, 1),
            (&self.w_o, 2),
            (&self.w_c, 3),
        ];
        let mut da = [vec![0.0; hd], vec![0.0; hd], vec![0.0; hd], vec![0.0; hd]];
        for r in 0..hd {
            let (i, f, o, g, tc) = (cache.i[r], cache.f[r], cache.o[r], cache.g[r], cache.tanh_c[r]);
            let d_o = dh[r] * tc;
            let dct = dc[r] + dh[r] * o * (1.0 - tc * tc);
            let d_i = dct * g;
            let d_g = dct * i;
            let d_f = dct * cache.c_prev[r];
            dc_prev[r] = dct * f;
            da[0][r] = d_i * i * (1.0 - i);
            da[1][r] = d_f * f * (1.0 - f);
            da[2][r] = d_o * o * (1.0 - o);
            da[3][r] = d_g * (1.0 - g * g);
        }
        let gw = [&mut grads.w_i, &mut grads.w_f, &mut grads.w_o, &mut grads.w_c];
        for ((w, k), dw) in blocks.iter().zip(gw) {
            let dak = &da[*k];
            let cols = w.cols();
            let dws = dw.as_mut_slice();
            for r in 0..hd {
                let a = dak[r];
                if a == 0.0 {
                    continue;
                }
                let wrow = w.row(r);
                let drow = &mut dws[r * cols..(r + 1) * cols];
                for c in 0..cols {
                    drow[c] += a * cache.hx[c];
                    dhx[c] += a * wrow[c];
                }
            }
        }
        let gb = [&mut grads.b_i, &mut grads.b_f, &mut grads.b_o, &mut grads.b_c];
        for (db, dak) in gb.into_iter().zip(&da) {
            for (x, y) in db.as_mut_slice().iter_mut().zip(dak) {
                *x += y;
            }
        }
        let dx = dhx.split_off(hd);
        (dhx, dc_prev, dx)
    }
}

impl ParamSet for LstmParams {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![
            ("w_i".into(), &self.w_i),
            ("w_f".into(), &self.w_f),
            ("w_o".into(), &self.w_o),
            ("w_c".into(), &self.w_c),
            ("b_i".into(), &self.b_i),
            ("b_f".into(), &self.b_f),
            ("b_o".into(), &self.b_o),
            ("b_c".into(), &self.b_c),
        ]
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        vec![
            ("w_i".into(), &mut self.w_i),
            ("w_f".into(), &mut self.w_f),
            ("w_o".into(), &mut self.w_o),
            ("w_c".into(), &mut self.w_c),
            ("b_i".into(), &mut self.b_i),
            ("b_f".into(), &mut self.b_f),
            ("b_o".into(), &mut self.b_o),
            ("b_c".into(), &mut self.b_c),
        ]
    }
}

/// One LSTM transition.
pub fn lstm_step(params: &LstmParams, prev: &LstmState, x: &[f64]) -> Result<LstmState> {
    params.step_cached(prev, x).map(|(s, _)| s)
}

/// Forward trace of a sequence; masked steps have no cache.
#[derive(Clone, Debug)]
pub struct LstmTrace {
    pub states: Vec<LstmState>,
    caches: Vec<Option<StepCache>>,
}

impl LstmTrace {
    pub fn final_state(&self) -> &LstmState {
        self.states.last().expect("nonempty trace")
    }
}

pub fn run_sequence(
    params: &LstmParams,
    xs: &[Vec<f64>],
    mask: &[bool],
    init: &LstmState,
) -> Result<LstmTrace> {
    if mask.len() != xs.len() {
        return Err(Error::dim("encode_sequence mask", xs.len(), mask.len()));
    }
    let mut states = Vec::with_capacity(xs.len());
    let mut caches = Vec::with_capacity(xs.len());
    let mut cur = init.clone();
    for (x, &valid) in xs.iter().zip(mask) {
        if valid {
            let (next, cache) = params.step_cached(&cur, x)?;
            cur = next;
            caches.push(Some(cache));
        } else {
            caches.push(None);
        }
        states.push(cur.clone());
    }
    Ok(LstmTrace { states, caches })
}

/// Left-to-right fold of [`lstm_step`] from `init`. Masked steps copy the
/// state through unchanged, so the last state equals the state after the
/// last unmasked input.
pub fn encode_sequence(
    params: &LstmParams,
    xs: &[Vec<f64>],
    mask: &[bool],
    init: &LstmState,
) -> Result<Vec<LstmState>> {
    if xs.is_empty() {
        return Err(Error::Empty("lstm input sequence"));
    }
    run_sequence(params, xs, mask, init).map(|t| t.states)
}

/// Backward pass through a sequence. `dh_steps[t]` is the gradient arriving
/// at output `h_t` from above (may be empty for none); `dh_last`/`dc_last`
/// arrive at the final state. Returns `(dxs, dh_init, dc_init)`.
pub fn backward_sequence(
    params: &LstmParams,
    trace: &LstmTrace,
    dh_steps: &[Vec<f64>],
    dh_last: &[f64],
    dc_last: &[f64],
    grads: &mut LstmParams,
) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let hd = params.hidden_dim();
    let n = trace.caches.len();
    let mut dh = dh_last.to_vec();
    let mut dc = dc_last.to_vec();
    let mut dxs = vec![Vec::new(); n];
    for t in (0..n).rev() {
        if let Some(step) = dh_steps.get(t).filter(|v| !v.is_empty()) {
            for (a, b) in dh.iter_mut().zip(step) {
                *a += b;
            }
        }
        match &trace.caches[t] {
            Some(cache) => {
                let (dh_prev, dc_prev, dx) = params.step_backward(cache, &dh, &dc, grads);
                dh = dh_prev;
                dc = dc_prev;
                dxs[t] = dx;
            }
            None => dxs[t] = vec![0.0; params.input_dim()],
        }
    }
    debug_assert_eq!(dh.len(), hd);
    (dxs, dh, dc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::grad_check;

    #[test]
    fn all_zero_gives_half_gates_and_zero_state() {
        let p = LstmParams::zeros(3, 2);
        let (s, cache) = p.step_cached(&LstmState::zeros(3), &[0.0, 0.0]).unwrap();
        assert_eq!(s, LstmState::zeros(3));
        assert!(cache.i.iter().chain(&cache.f).chain(&cache.o).all(|v| *v == 0.5));
        assert!(cache.g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn saturated_forget_gate_keeps_cell() {
        let mut p = LstmParams::zeros(2, 2);
        p.b_f.fill(10.0);
        p.b_i.fill(-10.0);
        p.b_o.fill(-10.0);
        p.b_c.fill(-10.0);
        let prev = LstmState { h: vec![0.0; 2], c: vec![1.0; 2] };
        let s = lstm_step(&p, &prev, &[0.3, -0.7]).unwrap();
        // Scalar recomputation: c = σ(10)·1 + σ(-10)·tanh(-10)
        let expected = sigmoid(10.0) + sigmoid(-10.0) * (-10f64).tanh();
        for c in &s.c {
            assert!((c - 1.0).abs() < 1e-3);
            assert!((c - expected).abs() < 1e-15);
        }
    }

    /// Independent scalar-loop implementation of one step.
    fn scalar_step(p: &LstmParams, h: &[f64], c: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hd = h.len();
        let z: Vec<f64> = h.iter().chain(x).copied().collect();
        let lin = |w: &Matrix, b: &Matrix, r: usize| {
            let mut s = b.get(r, 0);
            for k in 0..z.len() {
                s += w.get(r, k) * z[k];
            }
            s
        };
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut hn = vec![0.0; hd];
        let mut cn = vec![0.0; hd];
        for r in 0..hd {
            let i = sig(lin(&p.w_i, &p.b_i, r));
            let f = sig(lin(&p.w_f, &p.b_f, r));
            let o = sig(lin(&p.w_o, &p.b_o, r));
            let g = lin(&p.w_c, &p.b_c, r).tanh();
            cn[r] = f * c[r] + i * g;
            hn[r] = o * cn[r].tanh();
        }
        (hn, cn)
    }

    #[test]
    fn matches_scalar_oracle() {
        let mut rng = Rng::new(42);
        let mut p = LstmParams::uniform(4, 4, 0.8, &mut rng);
        for b in [&mut p.b_i, &mut p.b_f, &mut p.b_o, &mut p.b_c] {
            *b = Matrix::uniform(4, 1, -0.5, 0.5, &mut rng);
        }
        let h: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let c: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let x: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let s = lstm_step(&p, &LstmState { h: h.clone(), c: c.clone() }, &x).unwrap();
        let (hn, cn) = scalar_step(&p, &h, &c, &x);
        for k in 0..4 {
            assert!((s.h[k] - hn[k]).abs() < 1e-12);
            assert!((s.c[k] - cn[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_errors() {
        let p = LstmParams::zeros(3, 2);
        assert!(lstm_step(&p, &LstmState::zeros(3), &[0.0]).is_err());
        assert!(lstm_step(&p, &LstmState::zeros(2), &[0.0, 0.0]).is_err());
        assert!(encode_sequence(&p, &[], &[], &LstmState::zeros(3)).is_err());
    }

    #[test]
    fn sequence_mask_contract() {
        let mut rng = Rng::new(1);
        let p = LstmParams::uniform(3, 2, 0.5, &mut rng);
        let x = vec![vec![0.5, -0.2], vec![0.1, 0.9]];
        let one = encode_sequence(&p, &x[..1], &[true], &LstmState::zeros(3)).unwrap();
        assert_eq!(one[0], lstm_step(&p, &LstmState::zeros(3), &x[0]).unwrap());
        let mut padded = x.clone();
        padded.push(vec![0.0, 0.0]);
        padded.push(vec![0.0, 0.0]);
        let states = encode_sequence(&p, &padded, &[true, true, false, false], &LstmState::zeros(3)).unwrap();
        assert_eq!(states[3], states[1]);
    }

    #[test]
    fn five_step_gradient_check() {
        let mut rng = Rng::new(9);
        let mut p = LstmParams::uniform(4, 3, 0.5, &mut rng);
        for b in [&mut p.b_i, &mut p.b_f, &mut p.b_o, &mut p.b_c] {
            *b = Matrix::uniform(4, 1, -0.3, 0.3, &mut rng);
        }
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
        let mask = [true, true, false, true, true];
        let proj: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
        let cproj: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let init = LstmState {
            h: (0..4).map(|_| rng.uniform(-0.5, 0.5)).collect(),
            c: (0..4).map(|_| rng.uniform(-0.5, 0.5)).collect(),
        };
        // Loss touches every h_t and the final c.
        let loss = |q: &LstmParams| -> Result<f64> {
            let t = run_sequence(q, &xs, &mask, &init)?;
            let mut l = 0.0;
            for (s, w) in t.states.iter().zip(&proj) {
                l += s.h.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            }
            l += t.final_state().c.iter().zip(&cproj).map(|(a, b)| a * b).sum::<f64>();
            Ok(l)
        };
        let trace = run_sequence(&p, &xs, &mask, &init).unwrap();
        let mut grads = LstmParams::zeros(4, 3);
        let zeros = vec![0.0; 4];
        backward_sequence(&p, &trace, &proj, &zeros, &cproj, &mut grads);
        let report = grad_check(&mut p, &grads, 1e-6, 1e-4, loss).unwrap();
        assert!(report.passed, "{:?}", report.worst());
    }
}
