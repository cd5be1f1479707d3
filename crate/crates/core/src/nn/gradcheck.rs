//! Central-difference gradient checking.

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// A set of named parameter blocks. Block order must be stable between
/// calls and between two values of the same shape (parameters and their
/// gradients).
pub trait ParamSet {
    fn blocks(&self) -> Vec<(String, &Matrix)>;
    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)>;

    fn num_params(&self) -> usize {
        self.blocks().iter().map(|(_, m)| m.as_slice().len()).sum()
    }

    fn sum_squares(&self) -> f64 {
        self.blocks().iter().map(|(_, m)| m.sum_squares()).sum()
    }
}

impl ParamSet for Matrix {
    fn blocks(&self) -> Vec<(String, &Matrix)> {
        vec![("w".to_string(), self)]
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        vec![("w".to_string(), self)]
    }
}

#[derive(Clone, Debug)]
pub struct BlockCheck {
    pub name: String,
    /// `max_i |a_i - n_i| / max(max_i |a_i|, max_i |n_i|)`; zero when both
    /// gradients vanish on the whole block.
    pub rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub blocks: Vec<BlockCheck>,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl GradCheckReport {
    pub fn worst(&self) -> Option<&BlockCheck> {
        self.blocks
            .iter()
            .max_by(|a, b| a.rel_error.total_cmp(&b.rel_error))
    }
}

const VANISHING: f64 = 1e-12;

/// Compares `analytic` against central differences of `f` around `params`.
///
/// `f` must be deterministic. `params` is restored exactly after each probe.
pub fn grad_check<P, F>(
    params: &mut P,
    analytic: &P,
    eps: f64,
    tol: f64,
    mut f: F,
) -> Result<GradCheckReport>
where
    P: ParamSet,
    F: FnMut(&P) -> Result<f64>,
{
    if eps <= 0.0 {
        return Err(Error::Config(format!("grad_check eps must be > 0, got {eps}")));
    }
    let grads: Vec<(String, Vec<f64>)> = analytic
        .blocks()
        .into_iter()
        .map(|(n, m)| (n, m.as_slice().to_vec()))
        .collect();
    let shapes: Vec<usize> = params.blocks().iter().map(|(_, m)| m.as_slice().len()).collect();
    if shapes.len() != grads.len() || shapes.iter().zip(&grads).any(|(s, (_, g))| *s != g.len()) {
        return Err(Error::dim(
            "grad_check",
            format!("{shapes:?}"),
            format!("{:?}", grads.iter().map(|(_, g)| g.len()).collect::<Vec<_>>()),
        ));
    }

    let mut eval = |p: &P| -> Result<f64> {
        let v = f(p)?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("objective evaluated to {v}")));
        }
        Ok(v)
    };

    let mut blocks = Vec::with_capacity(grads.len());
    for (b, (name, analytic_block)) in grads.iter().enumerate() {
        let mut numeric = vec![0.0; analytic_block.len()];
        for (i, slot) in numeric.iter_mut().enumerate() {
            let orig = params.blocks_mut()[b].1.as_slice()[i];
            params.blocks_mut()[b].1.as_mut_slice()[i] = orig + eps;
            let plus = eval(params)?;
            params.blocks_mut()[b].1.as_mut_slice()[i] = orig - eps;
            let minus = eval(params)?;
            params.blocks_mut()[b].1.as_mut_slice()[i] = orig;
            *slot = (plus - minus) / (2.0 * eps);
        }
        let scale = analytic_block
            .iter()
            .chain(&numeric)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let max_abs_error = analytic_block
            .iter()
            .zip(&numeric)
            .fold(0.0f64, |m, (a, n)| m.max((a - n).abs()));
        let rel_error = if scale < VANISHING {
            0.0
        } else {
            max_abs_error / scale
        };
        blocks.push(BlockCheck {
            name: name.clone(),
            rel_error,
            max_abs_error,
        });
    }
    let max_rel_error = blocks.iter().fold(0.0f64, |m, b| m.max(b.rel_error));
    Ok(GradCheckReport {
        blocks,
        max_rel_error,
        tolerance: tol,
        passed: max_rel_error <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Rng;

    #[test]
    fn quadratic_gradient_is_exact() {
        let mut rng = Rng::new(4);
        let mut w = Matrix::uniform(5, 1, -2.0, 2.0, &mut rng);
        let analytic = w.clone();
        let report = grad_check(&mut w, &analytic, 1e-5, 1e-10, |p| {
            Ok(p.sum_squares() / 2.0)
        })
        .unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.max_rel_error < 1e-10);
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let mut w = Matrix::column(vec![1.0, 2.0]);
        let wrong = Matrix::column(vec![1.0, 3.0]);
        let report = grad_check(&mut w, &wrong, 1e-5, 1e-6, |p| Ok(p.sum_squares() / 2.0)).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn params_restored_after_check() {
        let mut w = Matrix::column(vec![0.3, -0.7]);
        let before = w.clone();
        let g = w.clone();
        grad_check(&mut w, &g, 1e-5, 1e-8, |p| Ok(p.sum_squares() / 2.0)).unwrap();
        assert_eq!(w, before);
    }

    #[test]
    fn non_finite_objective_errors() {
        let mut w = Matrix::column(vec![1.0]);
        let g = w.clone();
        let r = grad_check(&mut w, &g, 1e-5, 1e-6, |_| Ok(f64::NAN));
        assert!(matches!(r, Err(Error::NonFinite(_))));
        assert!(grad_check(&mut w, &g, 0.0, 1e-6, |_| Ok(0.0)).is_err());
    }
}
