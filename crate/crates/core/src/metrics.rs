use serde::{Deserialize, Serialize};

use crate::data::EvalSplit;
use crate::error::{Error, Result};
use crate::nn::Model;
use crate::pseudo_label::hard_label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub accuracy: f64,
    pub error_rate: f64,
}

/// Fraction of argmax predictions matching the eval labels.
pub fn evaluate(model: &Model, split: &EvalSplit) -> Result<Accuracy> {
    if split.is_empty() {
        return Err(Error::Usage("cannot evaluate on an empty split".into()));
    }
    let (pred, _) = hard_label(model, &split.features)?;
    let correct = pred
        .iter()
        .zip(&split.labels)
        .filter(|(p, y)| p == y)
        .count();
    let accuracy = correct as f64 / split.len() as f64;
    Ok(Accuracy {
        accuracy,
        error_rate: 1.0 - accuracy,
    })
}
