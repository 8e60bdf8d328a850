use serde::{Deserialize, Serialize};

use super::model::{Gradients, Model};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimKind {
    Sgd,
    Adam,
}

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimConfig {
    pub kind: OptimKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            kind: OptimKind::Adam,
            learning_rate: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.kind == OptimKind::Adam {
            if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
                return Err(Error::Config("adam betas must lie in [0, 1)".into()));
            }
            if self.epsilon.is_nan() || self.epsilon <= 0.0 {
                return Err(Error::Config("adam epsilon must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Moments {
    first: Vec<f64>,
    second: Vec<f64>,
}

/// Mutable optimizer state. Adam moments are allocated on the first step.
#[derive(Debug, Clone)]
pub struct OptimState {
    config: OptimConfig,
    moments: Option<Moments>,
    step: u64,
}

impl OptimState {
    pub fn new(config: OptimConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            moments: None,
            step: 0,
        })
    }

    pub fn sgd(learning_rate: f64) -> Result<Self> {
        Self::new(OptimConfig {
            kind: OptimKind::Sgd,
            learning_rate,
            ..OptimConfig::default()
        })
    }

    pub fn adam(learning_rate: f64) -> Result<Self> {
        Self::new(OptimConfig {
            kind: OptimKind::Adam,
            learning_rate,
            ..OptimConfig::default()
        })
    }

    /// Plain SGD with a zero learning rate: every step is a no-op.
    pub fn frozen() -> Self {
        Self {
            config: OptimConfig {
                kind: OptimKind::Sgd,
                learning_rate: 0.0,
                ..OptimConfig::default()
            },
            moments: None,
            step: 0,
        }
    }

    pub fn config(&self) -> &OptimConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Applies one update. The model is left untouched on error.
    pub fn apply(&mut self, model: &mut Model, grads: &Gradients) -> Result<()> {
        if grads.layers.len() != model.layers().len() {
            return Err(Error::Shape(format!(
                "{} gradient layers for a {}-layer model",
                grads.layers.len(),
                model.layers().len()
            )));
        }
        for (i, (g, l)) in grads.layers.iter().zip(model.layers()).enumerate() {
            if g.weight.rows() != l.weight.rows()
                || g.weight.cols() != l.weight.cols()
                || g.bias.len() != l.bias.len()
            {
                return Err(Error::Shape(format!(
                    "gradient shape mismatch in layer {i}"
                )));
            }
        }
        if let Some(layer) = grads.first_non_finite_layer() {
            return Err(Error::Numeric {
                msg: "non-finite gradient".into(),
                layer: Some(layer),
            });
        }
        let lr = self.config.learning_rate;
        match self.config.kind {
            OptimKind::Sgd => {
                for (l, g) in model.layers_mut().iter_mut().zip(&grads.layers) {
                    for (p, d) in l.weight.data_mut().iter_mut().zip(g.weight.data()) {
                        *p -= lr * d;
                    }
                    for (p, d) in l.bias.iter_mut().zip(&g.bias) {
                        *p -= lr * d;
                    }
                }
            }
            OptimKind::Adam => {
                let n = model.param_count();
                let moments = self.moments.get_or_insert_with(|| Moments {
                    first: vec![0.0; n],
                    second: vec![0.0; n],
                });
                if moments.first.len() != n {
                    return Err(Error::Shape(format!(
                        "adam moments hold {} entries, model has {n} parameters",
                        moments.first.len()
                    )));
                }
                let OptimConfig {
                    beta1,
                    beta2,
                    epsilon,
                    ..
                } = self.config;
                let t = (self.step + 1) as i32;
                let bc1 = 1.0 - beta1.powi(t);
                let bc2 = 1.0 - beta2.powi(t);
                let mut idx = 0;
                for (l, g) in model.layers_mut().iter_mut().zip(&grads.layers) {
                    let params = l.weight.data_mut().iter_mut().chain(l.bias.iter_mut());
                    let gs = g.weight.data().iter().chain(&g.bias);
                    for (p, &d) in params.zip(gs) {
                        let m = &mut moments.first[idx];
                        let v = &mut moments.second[idx];
                        *m = beta1 * *m + (1.0 - beta1) * d;
                        *v = beta2 * *v + (1.0 - beta2) * d * d;
                        let m_hat = *m / bc1;
                        let v_hat = *v / bc2;
                        *p -= lr * m_hat / (v_hat.sqrt() + epsilon);
                        idx += 1;
                    }
                }
            }
        }
        self.step += 1;
        Ok(())
    }
}
