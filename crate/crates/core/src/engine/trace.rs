use serde::{Deserialize, Serialize};

use super::Method;

/// One optimizer step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Right-hand (current) domain of the transition.
    pub domain_t: usize,
    /// Position in the ρ schedule.
    pub stage: usize,
    pub rho: f64,
    pub step: usize,
    /// 1-based left/right batch indices used for this step.
    pub left_batch: usize,
    pub right_batch: usize,
    pub loss_mixed: f64,
    pub loss_left: f64,
    pub loss_right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptTrace {
    pub method: Method,
    pub steps: Vec<StepRecord>,
    /// `domain_accuracy[t]`: eval accuracy right after adapting to domain `t`
    /// (index 0 is the source-trained model).
    pub domain_accuracy: Vec<f64>,
}

impl AdaptTrace {
    pub(crate) fn new(method: Method) -> Self {
        Self {
            method,
            steps: Vec::new(),
            domain_accuracy: Vec::new(),
        }
    }

    pub fn target_accuracy(&self) -> f64 {
        self.domain_accuracy.last().copied().unwrap_or(f64::NAN)
    }
}
