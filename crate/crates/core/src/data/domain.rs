use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Option<usize>,
}

/// One domain's training split. Features are cached as a dense tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    index: usize,
    samples: Vec<Sample>,
    shift_param: f64,
    features: Tensor2,
}

impl Domain {
    pub fn new(index: usize, samples: Vec<Sample>, shift_param: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Usage(format!("domain {index} has no samples")));
        }
        let features = Tensor2::from_rows(
            &samples
                .iter()
                .map(|s| s.features.as_slice())
                .collect::<Vec<_>>(),
        )?;
        Ok(Self {
            index,
            samples,
            shift_param,
            features,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn shift_param(&self) -> f64 {
        self.shift_param
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Tensor2 {
        &self.features
    }

    /// True when every sample carries a label.
    pub fn is_labeled(&self) -> bool {
        self.samples.iter().all(|s| s.label.is_some())
    }

    pub fn has_any_label(&self) -> bool {
        self.samples.iter().any(|s| s.label.is_some())
    }

    pub fn check_indices(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| i >= self.len()) {
            Some(bad) => Err(Error::Usage(format!(
                "sample index {bad} out of range for domain {} of size {}",
                self.index,
                self.len()
            ))),
            None => Ok(()),
        }
    }

    pub fn batch_features(&self, indices: &[usize]) -> Result<Tensor2> {
        self.check_indices(indices)?;
        Ok(self.features.select_rows(indices))
    }

    /// Ground-truth labels for the given indices, if all are labeled.
    pub fn batch_labels(&self, indices: &[usize]) -> Option<Vec<usize>> {
        indices
            .iter()
            .map(|&i| self.samples.get(i)?.label)
            .collect()
    }

    fn reindexed(&self, index: usize) -> Self {
        Self {
            index,
            ..self.clone()
        }
    }
}

/// Held-out labeled data, used only for metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSplit {
    pub features: Tensor2,
    pub labels: Vec<usize>,
}

impl EvalSplit {
    pub fn new(features: Tensor2, labels: Vec<usize>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "eval split has {} rows and {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Ordered domains `D_0..D_n`: a labeled source, then unlabeled training
/// splits. Every domain also has a labeled eval split.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSequence {
    domains: Vec<Domain>,
    eval: Vec<EvalSplit>,
    dim: usize,
    class_count: usize,
}

impl DomainSequence {
    pub fn new(domains: Vec<Domain>, eval: Vec<EvalSplit>, class_count: usize) -> Result<Self> {
        if domains.len() < 2 {
            return Err(Error::Config(format!(
                "a domain sequence needs a source and a target, got {} domains",
                domains.len()
            )));
        }
        if eval.len() != domains.len() {
            return Err(Error::Config(format!(
                "{} eval splits for {} domains",
                eval.len(),
                domains.len()
            )));
        }
        if class_count < 2 {
            return Err(Error::Config("class_count must be at least 2".into()));
        }
        let dim = domains[0].dim();
        for (t, d) in domains.iter().enumerate() {
            if d.index() != t {
                return Err(Error::Config(format!(
                    "domain at position {t} carries index {}",
                    d.index()
                )));
            }
            if d.dim() != dim || eval[t].features.cols() != dim {
                return Err(Error::Shape(format!(
                    "domain {t} has inconsistent feature dim"
                )));
            }
            if t == 0 && !d.is_labeled() {
                return Err(Error::Config("source domain must be fully labeled".into()));
            }
            if t > 0 && d.has_any_label() {
                return Err(Error::Config(format!(
                    "training split of domain {t} must be unlabeled"
                )));
            }
            let labels = d.samples().iter().filter_map(|s| s.label);
            if labels
                .chain(eval[t].labels.iter().copied())
                .any(|y| y >= class_count)
            {
                return Err(Error::Config(format!(
                    "domain {t} has a label outside [0, {class_count})"
                )));
            }
            if eval[t].is_empty() {
                return Err(Error::Config(format!("domain {t} has an empty eval split")));
            }
        }
        Ok(Self {
            domains,
            eval,
            dim,
            class_count,
        })
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain(&self, t: usize) -> &Domain {
        &self.domains[t]
    }

    pub fn eval(&self, t: usize) -> &EvalSplit {
        &self.eval[t]
    }

    pub fn eval_splits(&self) -> &[EvalSplit] {
        &self.eval
    }

    /// Index of the target domain.
    pub fn n(&self) -> usize {
        self.domains.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn shift_params(&self) -> Vec<f64> {
        self.domains.iter().map(Domain::shift_param).collect()
    }

    /// The two-domain sequence `(D_0, D_n)`, with the target re-indexed to 1.
    pub fn endpoints(&self) -> Self {
        let n = self.n();
        Self {
            domains: vec![self.domains[0].clone(), self.domains[n].reindexed(1)],
            eval: vec![self.eval[0].clone(), self.eval[n].clone()],
            dim: self.dim,
            class_count: self.class_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(x: f64, label: Option<usize>) -> Sample {
        Sample {
            features: vec![x, -x],
            label,
        }
    }

    fn eval() -> EvalSplit {
        EvalSplit::new(Tensor2::from_rows(&[[0.0, 0.0]]).unwrap(), vec![0]).unwrap()
    }

    #[test]
    fn rejects_labels_on_unlabeled_splits() {
        let d0 = Domain::new(0, vec![sample(1.0, Some(0))], 0.0).unwrap();
        let d1 = Domain::new(1, vec![sample(1.0, Some(1))], 1.0).unwrap();
        let err = DomainSequence::new(vec![d0, d1], vec![eval(), eval()], 2).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn rejects_unlabeled_source_and_bad_index() {
        let d0 = Domain::new(0, vec![sample(1.0, None)], 0.0).unwrap();
        let d1 = Domain::new(1, vec![sample(1.0, None)], 1.0).unwrap();
        assert!(
            DomainSequence::new(vec![d0.clone(), d1.clone()], vec![eval(), eval()], 2).is_err()
        );
        let d0 = Domain::new(0, vec![sample(1.0, Some(0))], 0.0).unwrap();
        let d2 = Domain::new(2, vec![sample(1.0, None)], 1.0).unwrap();
        assert!(DomainSequence::new(vec![d0, d2], vec![eval(), eval()], 2).is_err());
    }

    #[test]
    fn empty_domain_is_usage_error() {
        assert!(matches!(Domain::new(0, vec![], 0.0), Err(Error::Usage(_))));
    }

    #[test]
    fn endpoints_reindex_target() {
        let d0 = Domain::new(0, vec![sample(1.0, Some(0))], 0.0).unwrap();
        let d1 = Domain::new(1, vec![sample(2.0, None)], 1.0).unwrap();
        let d2 = Domain::new(2, vec![sample(3.0, None)], 2.0).unwrap();
        let seq = DomainSequence::new(vec![d0, d1, d2], vec![eval(), eval(), eval()], 2).unwrap();
        let ends = seq.endpoints();
        assert_eq!(ends.n(), 1);
        assert_eq!(ends.domain(1).index(), 1);
        assert_eq!(ends.domain(1).shift_param(), 2.0);
    }
}
