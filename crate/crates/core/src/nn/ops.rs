use crate::error::{Error, Result};
use crate::nn::{axpy, Matrix, Rng};

/// `W x + b`.
pub fn affine(w: &Matrix, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != w.rows() {
        return Err(Error::dim("affine", w.rows(), b.len()));
    }
    let mut y = w.matvec(x)?;
    axpy(&mut y, 1.0, b);
    Ok(y)
}

/// Backward pass of [`affine`]: accumulates `dW += dy x^T`, `db += dy` and
/// `dx += W^T dy`.
pub fn affine_backward(
    w: &Matrix,
    x: &[f64],
    dy: &[f64],
    dw: &mut Matrix,
    db: &mut [f64],
    dx: &mut [f64],
) -> Result<()> {
    if dy.len() != w.rows() || db.len() != w.rows() {
        return Err(Error::dim("affine_backward", w.rows(), dy.len()));
    }
    dw.add_outer(dy, x)?;
    axpy(db, 1.0, dy);
    w.matvec_t_acc(dy, dx)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax(s: &[f64]) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(Error::Empty("softmax input"));
    }
    if let Some(bad) = s.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("softmax input contains {bad}")));
    }
    let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = s.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / total).collect())
}

/// Given `p = softmax(s)` and `dp`, returns `ds`.
pub fn softmax_backward(p: &[f64], dp: &[f64]) -> Vec<f64> {
    let inner: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
    p.iter().zip(dp).map(|(pi, dpi)| pi * (dpi - inner)).collect()
}

/// Inverted dropout mask: each unit is kept with probability `1 - rate`
/// and survivors are scaled by `1 / (1 - rate)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMask {
    scale: Vec<f64>,
}

impl DropoutMask {
    pub fn sample(rate: f64, len: usize, rng: &mut Rng) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Config(format!("dropout rate {rate} not in [0, 1)")));
        }
        let keep = 1.0 / (1.0 - rate);
        let scale = (0..len)
            .map(|_| if rng.bernoulli(rate) { 0.0 } else { keep })
            .collect();
        Ok(DropoutMask { scale })
    }

    pub fn identity(len: usize) -> Self {
        DropoutMask {
            scale: vec![1.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_empty()
    }

    pub fn scales(&self) -> &[f64] {
        &self.scale
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.scale.len() {
            return Err(Error::dim("dropout", self.scale.len(), x.len()));
        }
        Ok(x.iter().zip(&self.scale).map(|(a, s)| a * s).collect())
    }

    /// The mask is linear, so backward is the same elementwise product.
    pub fn backward(&self, dy: &[f64]) -> Result<Vec<f64>> {
        self.apply(dy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_identity_and_zero_weights() {
        let y = affine(&Matrix::identity(2), &[3.0, -1.0], &[0.0, 0.0]).unwrap();
        assert_eq!(y, vec![3.0, -1.0]);
        let y = affine(&Matrix::zeros(2, 5), &[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 2.0]).unwrap();
        assert_eq!(y, vec![1.0, 2.0]);
    }

    #[test]
    fn affine_shape_errors() {
        let w = Matrix::zeros(2, 3);
        assert!(affine(&w, &[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(affine(&w, &[1.0, 2.0, 3.0], &[0.0]).is_err());
    }

    #[test]
    fn affine_matches_scalar_loops() {
        // Oracle: textbook triple loops, written independently of Matrix.
        let mut rng = Rng::new(3);
        let (rows, cols) = (3, 4);
        let w: Vec<f64> = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let x: Vec<f64> = (0..cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..rows).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let dy: Vec<f64> = (0..rows).map(|_| rng.uniform(-1.0, 1.0)).collect();

        let mut y_ref = vec![0.0; rows];
        let mut dw_ref = vec![0.0; rows * cols];
        let mut dx_ref = vec![0.0; cols];
        for i in 0..rows {
            y_ref[i] = b[i];
            for j in 0..cols {
                y_ref[i] += w[i * cols + j] * x[j];
                dw_ref[i * cols + j] = dy[i] * x[j];
                dx_ref[j] += w[i * cols + j] * dy[i];
            }
        }

        let wm = Matrix::new(rows, cols, w).unwrap();
        let y = affine(&wm, &x, &b).unwrap();
        let mut dw = Matrix::zeros(rows, cols);
        let mut db = vec![0.0; rows];
        let mut dx = vec![0.0; cols];
        affine_backward(&wm, &x, &dy, &mut dw, &mut db, &mut dx).unwrap();

        for i in 0..rows {
            assert!((y[i] - y_ref[i]).abs() < 1e-12);
            assert!((db[i] - dy[i]).abs() < 1e-12);
        }
        for (a, e) in dw.as_slice().iter().zip(&dw_ref) {
            assert!((a - e).abs() < 1e-12);
        }
        for (a, e) in dx.iter().zip(&dx_ref) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let p = softmax(&[2f64.ln(), 0.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(softmax(&[]).is_err());
        assert!(softmax(&[f64::NAN, 1.0]).is_err());
        // Large inputs stay finite.
        let p = softmax(&[1000.0, 999.0]).unwrap();
        assert!(p.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn sigmoid_is_symmetric_and_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(3.0) + sigmoid(-3.0) - 1.0).abs() < 1e-15);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }

    #[test]
    fn dropout_rate_and_rescale() {
        let mut rng = Rng::new(11);
        let p = 0.5;
        let mask = DropoutMask::sample(p, 100_000, &mut rng).unwrap();
        let dropped = mask.scales().iter().filter(|&&s| s == 0.0).count() as f64 / 1e5;
        assert!((dropped - p).abs() < 0.02, "dropped fraction {dropped}");
        assert!(mask.scales().iter().all(|&s| s == 0.0 || s == 2.0));
        let mean: f64 = mask.scales().iter().sum::<f64>() / 1e5;
        assert!((mean - 1.0).abs() < 0.02);
        assert!(DropoutMask::sample(1.0, 3, &mut rng).is_err());
    }

    #[test]
    fn dropout_reproducible() {
        let a = DropoutMask::sample(0.25, 64, &mut Rng::new(5)).unwrap();
        let b = DropoutMask::sample(0.25, 64, &mut Rng::new(5)).unwrap();
        assert_eq!(a, b);
    }
}
