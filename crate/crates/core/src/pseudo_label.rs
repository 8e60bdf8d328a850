//! Hard pseudo-labels, per-batch dynamic labeling, and the confidence filter.

use serde::{Deserialize, Serialize};

use crate::data::Domain;
use crate::error::{Error, Result};
use crate::nn::{softmax_rows, Model};
use crate::tensor::Tensor2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    GroundTruth,
    Pseudo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch {
    pub indices: Vec<usize>,
    pub labels: Vec<usize>,
    /// Max softmax probability per sample, 1 for ground truth.
    pub confidences: Vec<f64>,
    pub source: LabelSource,
}

impl LabeledBatch {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Row-wise argmax of softmax(logits), ties to the lowest class, plus the
/// winning probability.
pub fn hard_label_logits(logits: &Tensor2) -> (Vec<usize>, Vec<f64>) {
    softmax_rows(logits)
        .iter_rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (c, &p)| {
                    if p > best.1 {
                        (c, p)
                    } else {
                        best
                    }
                })
        })
        .unzip()
}

pub fn hard_label(model: &Model, features: &Tensor2) -> Result<(Vec<usize>, Vec<f64>)> {
    Ok(hard_label_logits(&model.forward(features)?))
}

/// Labels a batch with the model as it is right now. Source-domain batches
/// get their ground truth instead.
pub fn label_batch_dynamic(
    model: &Model,
    domain: &Domain,
    batch: &[usize],
) -> Result<LabeledBatch> {
    domain.check_indices(batch)?;
    if domain.is_labeled() {
        let labels = domain
            .batch_labels(batch)
            .expect("labeled domain has labels for valid indices");
        return Ok(LabeledBatch {
            indices: batch.to_vec(),
            confidences: vec![1.0; labels.len()],
            labels,
            source: LabelSource::GroundTruth,
        });
    }
    let (labels, confidences) = hard_label(model, &domain.batch_features(batch)?)?;
    Ok(LabeledBatch {
        indices: batch.to_vec(),
        labels,
        confidences,
        source: LabelSource::Pseudo,
    })
}

/// Drops the `⌊drop_fraction·N⌋` least confident samples. Ties drop the
/// earlier position first; survivors keep their order.
pub fn confidence_filter(batch: &LabeledBatch, drop_fraction: f64) -> Result<LabeledBatch> {
    if !(0.0..1.0).contains(&drop_fraction) {
        return Err(Error::Config(format!(
            "drop fraction {drop_fraction} outside [0, 1)"
        )));
    }
    let n = batch.len();
    let drop = (drop_fraction * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        batch.confidences[a]
            .total_cmp(&batch.confidences[b])
            .then(a.cmp(&b))
    });
    let mut keep = vec![true; n];
    for &pos in &order[..drop] {
        keep[pos] = false;
    }
    let pick = |v: &[_]| -> Vec<_> {
        v.iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(x, _)| *x)
            .collect()
    };
    Ok(LabeledBatch {
        indices: pick(&batch.indices),
        labels: pick(&batch.labels),
        confidences: batch
            .confidences
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(c, _)| *c)
            .collect(),
        source: batch.source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use crate::nn::{init_model, Activation, Dense, OptimState};
    use proptest::prelude::*;

    fn batch_with(conf: &[f64]) -> LabeledBatch {
        LabeledBatch {
            indices: (0..conf.len()).map(|i| i * 10).collect(),
            labels: (0..conf.len()).map(|i| i % 2).collect(),
            confidences: conf.to_vec(),
            source: LabelSource::Pseudo,
        }
    }

    #[test]
    fn hard_label_example() {
        let logits = Tensor2::from_rows(&[[0.0, 3.0, 1.0]]).unwrap();
        let (y, c) = hard_label_logits(&logits);
        assert_eq!(y, vec![1]);
        let e3 = 3f64.exp();
        let expected = e3 / (1.0 + e3 + 1f64.exp());
        assert!((c[0] - expected).abs() < 1e-15);
        assert!((c[0] - 0.8438).abs() < 1e-4);
    }

    #[test]
    fn uniform_logits_tie_to_class_zero() {
        let logits = Tensor2::from_rows(&[[2.0, 2.0, 2.0]]).unwrap();
        let (y, c) = hard_label_logits(&logits);
        assert_eq!(y, vec![0]);
        assert!((c[0] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn filter_identity_and_min_removal() {
        let b = batch_with(&[0.9, 0.8, 0.7, 0.95, 0.6, 0.99, 0.85, 0.75, 0.65, 0.91]);
        assert_eq!(confidence_filter(&b, 0.0).unwrap(), b);
        let f = confidence_filter(&b, 0.1).unwrap();
        assert_eq!(f.len(), 9);
        assert!(!f.indices.contains(&40));
        let expected: Vec<usize> = b.indices.iter().copied().filter(|&i| i != 40).collect();
        assert_eq!(f.indices, expected);
    }

    #[test]
    fn filter_ties_drop_earliest() {
        let b = batch_with(&[0.5; 10]);
        let f = confidence_filter(&b, 0.3).unwrap();
        assert_eq!(f.indices, vec![30, 40, 50, 60, 70, 80, 90]);
        assert!(confidence_filter(&b, 1.0).is_err());
    }

    fn tiny_domain(labeled: bool) -> Domain {
        let samples = (0..6)
            .map(|i| Sample {
                features: vec![i as f64 - 2.5, 0.5 * i as f64],
                label: labeled.then_some(i % 2),
            })
            .collect();
        Domain::new(if labeled { 0 } else { 1 }, samples, 0.0).unwrap()
    }

    #[test]
    fn source_batches_return_ground_truth() {
        let m = init_model(&[2, 4], 2, 0).unwrap();
        let lb = label_batch_dynamic(&m, &tiny_domain(true), &[5, 2, 1]).unwrap();
        assert_eq!(lb.source, LabelSource::GroundTruth);
        assert_eq!(lb.labels, vec![1, 0, 1]);
        assert_eq!(lb.confidences, vec![1.0; 3]);
    }

    #[test]
    fn dynamic_labels_are_deterministic_and_checked() {
        let m = init_model(&[2, 4], 2, 3).unwrap();
        let d = tiny_domain(false);
        let a = label_batch_dynamic(&m, &d, &[0, 3, 4]).unwrap();
        let b = label_batch_dynamic(&m, &d, &[0, 3, 4]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.source, LabelSource::Pseudo);
        assert!(matches!(
            label_batch_dynamic(&m, &d, &[6]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn relabel_flips_boundary_sample_after_step() {
        // logits = [x0, 0]; sample at x0 = 0.01 sits just on class 0's side
        let layer = Dense {
            weight: Tensor2::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap(),
            bias: vec![0.0, 0.0],
            activation: Activation::Identity,
        };
        let mut m = Model::from_layers(vec![layer]).unwrap();
        let samples = vec![Sample {
            features: vec![0.01, 0.0],
            label: None,
        }];
        let d = Domain::new(1, samples, 0.0).unwrap();
        let before = label_batch_dynamic(&m, &d, &[0]).unwrap();
        assert_eq!(before.labels, vec![0]);
        // a step pushing the class-0 bias down by 0.1 exceeds the 0.01 margin
        let x = Tensor2::from_rows(&[[0.0, 0.0]]).unwrap();
        let dlogits = Tensor2::from_rows(&[[1.0, 0.0]]).unwrap();
        m.backward_apply(&x, &dlogits, &mut OptimState::sgd(0.1).unwrap())
            .unwrap();
        let after = label_batch_dynamic(&m, &d, &[0]).unwrap();
        assert_eq!(after.labels, vec![1]);
    }

    #[test]
    fn frozen_model_dynamic_equals_static() {
        let m = init_model(&[2, 8], 2, 12).unwrap();
        let d = tiny_domain(false);
        let (all, conf) = hard_label(&m, d.features()).unwrap();
        let plan = crate::data::partition_batches(&d, 4, 2).unwrap();
        for batch in &plan.batches {
            let lb = label_batch_dynamic(&m, &d, batch).unwrap();
            for (k, &i) in batch.iter().enumerate() {
                assert_eq!(lb.labels[k], all[i]);
                assert_eq!(lb.confidences[k], conf[i]);
            }
        }
    }

    proptest! {
        #[test]
        fn labels_invariant_under_affine_row_transform(
            v in prop::collection::vec(-10.0f64..10.0, 12),
            scale in 0.1f64..10.0,
            shift in -100.0f64..100.0,
        ) {
            let t = Tensor2::new(4, 3, v.clone()).unwrap();
            let moved = Tensor2::new(4, 3, v.iter().map(|x| scale * x + shift).collect()).unwrap();
            let (a, _) = hard_label_logits(&t);
            let (b, _) = hard_label_logits(&moved);
            // exact ties can break differently after rounding; skip near-ties
            for r in 0..4 {
                let row = t.row(r);
                let mut s = row.to_vec();
                s.sort_by(|x, y| y.total_cmp(x));
                if s[0] - s[1] > 1e-9 {
                    prop_assert_eq!(a[r], b[r]);
                }
            }
        }

        #[test]
        fn filter_survivor_count(
            conf in prop::collection::vec(0.0f64..1.0, 1..80),
            frac in 0.0f64..0.99,
        ) {
            let b = batch_with(&conf);
            let f = confidence_filter(&b, frac).unwrap();
            prop_assert_eq!(f.len(), conf.len() - (frac * conf.len() as f64).floor() as usize);
            prop_assert!(f.confidences.iter().all(|c| (0.0..=1.0).contains(c)));
        }
    }
}
