use crate::error::{Error, Result};
use crate::tensor::Tensor2;

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Tensor2) -> Tensor2 {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    out
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn validate(logits: &Tensor2, labels: &[usize], weights: &[f64]) -> Result<f64> {
    let n = logits.rows();
    if n == 0 {
        return Err(Error::Usage("cross-entropy on an empty batch".into()));
    }
    if labels.len() != n || weights.len() != n {
        return Err(Error::Shape(format!(
            "batch of {n} rows with {} labels and {} weights",
            labels.len(),
            weights.len()
        )));
    }
    if !logits.all_finite() {
        return Err(Error::Numeric {
            msg: "non-finite logits".into(),
            layer: None,
        });
    }
    let k = logits.cols();
    if let Some(&bad) = labels.iter().find(|&&y| y >= k) {
        return Err(Error::Usage(format!("label {bad} outside [0, {k})")));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Usage(
            "sample weights must be finite and >= 0".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Usage(
            "at least one sample weight must be positive".into(),
        ));
    }
    Ok(total)
}

/// Weighted mean cross-entropy, normalized by the weight sum.
pub fn ce_loss(logits: &Tensor2, labels: &[usize], weights: &[f64]) -> Result<f64> {
    let total = validate(logits, labels, weights)?;
    let loss = logits
        .iter_rows()
        .zip(labels)
        .zip(weights)
        .map(|((row, &y), &w)| w * (log_sum_exp(row) - row[y]))
        .sum::<f64>();
    Ok(loss / total)
}

/// Weighted mean cross-entropy and its exact gradient w.r.t. the logits.
pub fn ce_loss_and_grad(
    logits: &Tensor2,
    labels: &[usize],
    weights: &[f64],
) -> Result<(f64, Tensor2)> {
    let total = validate(logits, labels, weights)?;
    let mut grad = softmax_rows(logits);
    let mut loss = 0.0;
    for (r, (&y, &w)) in labels.iter().zip(weights).enumerate() {
        let row = logits.row(r);
        loss += w * (log_sum_exp(row) - row[y]);
        let scale = w / total;
        let g = grad.row_mut(r);
        g[y] -= 1.0;
        g.iter_mut().for_each(|v| *v *= scale);
    }
    Ok((loss / total, grad))
}
