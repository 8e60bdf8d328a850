//! Central-difference gradient oracle.

use super::loss::{ce_loss, ce_loss_and_grad};
use super::model::{Gradients, Model};
use crate::error::{Error, Result};
use crate::tensor::Tensor2;

/// Central-difference gradient of the weighted CE loss, flattened in
/// [`Model::params`] order. Uses only forward passes.
pub fn numeric_gradients(
    model: &Model,
    batch: &Tensor2,
    labels: &[usize],
    weights: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    if !(h > 0.0 && h <= 1e-2) {
        return Err(Error::Usage(format!(
            "finite-difference step {h} outside (0, 1e-2]"
        )));
    }
    let mut probe = model.clone();
    let mut out = Vec::with_capacity(model.param_count());
    for i in 0..model.param_count() {
        let orig = *probe.param_mut(i);
        *probe.param_mut(i) = orig + h;
        let plus = ce_loss(&probe.forward(batch)?, labels, weights)?;
        *probe.param_mut(i) = orig - h;
        let minus = ce_loss(&probe.forward(batch)?, labels, weights)?;
        *probe.param_mut(i) = orig;
        out.push((plus - minus) / (2.0 * h));
    }
    Ok(out)
}

/// `max |a - n| / (|a| + |n| + 1e-12)` over paired entries.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / (a.abs() + n.abs() + 1e-12))
        .fold(0.0, f64::max)
}

/// Largest relative disagreement between backprop and central differences.
pub fn gradient_check(
    model: &Model,
    batch: &Tensor2,
    labels: &[usize],
    weights: &[f64],
    h: f64,
) -> Result<f64> {
    let analytic = analytic_gradients(model, batch, labels, weights)?;
    let numeric = numeric_gradients(model, batch, labels, weights, h)?;
    Ok(max_relative_error(&analytic.flatten(), &numeric))
}

pub(crate) fn analytic_gradients(
    model: &Model,
    batch: &Tensor2,
    labels: &[usize],
    weights: &[f64],
) -> Result<Gradients> {
    let cache = model.forward_cached(batch)?;
    let (_, dlogits) = ce_loss_and_grad(cache.logits(), labels, weights)?;
    model.backward(&cache, &dlogits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_model;
    use rand::Rng;

    fn random_problem(seed: u64) -> (Model, Tensor2, Vec<usize>, Vec<f64>) {
        let model = init_model(&[2, 5], 3, seed).unwrap();
        let mut rng = crate::seed::rng(seed ^ 0xABCD);
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-2.0..2.0)).collect();
        let labels = (0..4).map(|_| rng.random_range(0..3)).collect();
        (model, Tensor2::new(4, 2, x).unwrap(), labels, vec![1.0; 4])
    }

    #[test]
    fn backprop_agrees_with_finite_differences() {
        for seed in 0..5 {
            let (m, x, y, w) = random_problem(seed);
            let err = gradient_check(&m, &x, &y, &w, 1e-5).unwrap();
            assert!(err < 1e-5, "seed {seed}: {err}");
        }
    }

    #[test]
    fn doubled_gradient_is_caught() {
        let (m, x, y, w) = random_problem(3);
        let mut g = analytic_gradients(&m, &x, &y, &w).unwrap();
        g.scale(2.0);
        let n = numeric_gradients(&m, &x, &y, &w, 1e-5).unwrap();
        let err = max_relative_error(&g.flatten(), &n);
        assert!((err - 1.0 / 3.0).abs() < 1e-4, "{err}");
    }

    #[test]
    fn rejects_bad_step() {
        let (m, x, y, w) = random_problem(1);
        assert!(gradient_check(&m, &x, &y, &w, 0.0).is_err());
        assert!(gradient_check(&m, &x, &y, &w, 0.1).is_err());
    }
}
