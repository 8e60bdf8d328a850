//! Adaptation algorithms: the ρ-weighted Φ step, the full STDW loop,
//! gradual and direct self-training baselines, and the Lyapunov decrease
//! check for gradient descent on a strongly convex quadratic.

mod config;
mod gst;
mod lyapunov;
mod phi;
mod stdw;
mod trace;

pub use config::{AdaptConfig, Method};
pub use gst::{direct_adapt, gst_adapt, run_gst};
pub use lyapunov::{decrease_bound, lyapunov_check, LyapunovOutcome};
pub use phi::{phi_step, self_train_step, StepLosses};
pub use stdw::{rho_values, run_stdw, stdw_adapt};
pub use trace::{AdaptTrace, StepRecord};

use crate::data::{partition_batches, DomainSequence};
use crate::error::Result;
use crate::metrics::evaluate;
use crate::nn::{ce_loss_and_grad, init_model, Model, OptimState};
use crate::seed;

/// Stream tags passed to [`seed::derive`] alongside the run seed.
pub const TAG_INIT: u64 = 1;
/// Followed by the epoch.
pub const TAG_PRETRAIN: u64 = 2;
/// Followed by transition `t`, stage, and side (0 left, 1 right).
pub const TAG_STDW: u64 = 3;
/// Followed by domain `t` and epoch.
pub const TAG_GST: u64 = 4;
pub const TAG_RHO: u64 = 5;

/// Fresh model and optimizer, then `pretrain_epochs` supervised epochs on D_0.
pub fn pretrain_source(seq: &DomainSequence, cfg: &AdaptConfig) -> Result<(Model, OptimState)> {
    cfg.validate()?;
    let mut arch = vec![seq.dim()];
    arch.extend(&cfg.hidden);
    let mut model = init_model(
        &arch,
        seq.class_count(),
        seed::derive(cfg.seed, &[TAG_INIT]),
    )?;
    let mut opt = OptimState::new(cfg.optimizer)?;
    let source = seq.domain(0);
    for epoch in 0..cfg.pretrain_epochs {
        let plan = partition_batches(
            source,
            cfg.batch_size,
            seed::derive(cfg.seed, &[TAG_PRETRAIN, epoch as u64]),
        )?;
        for batch in &plan.batches {
            let x = source.batch_features(batch)?;
            let y = source.batch_labels(batch).expect("source is labeled");
            let cache = model.forward_cached(&x)?;
            let (_, d) = ce_loss_and_grad(cache.logits(), &y, &vec![1.0; y.len()])?;
            let grads = model.backward(&cache, &d)?;
            opt.apply(&mut model, &grads)?;
        }
    }
    Ok((model, opt))
}

/// Eval accuracy of `model` on domain `t`'s held-out split.
pub(crate) fn eval_accuracy(model: &Model, seq: &DomainSequence, t: usize) -> Result<f64> {
    Ok(evaluate(model, seq.eval(t))?.accuracy)
}

/// Runs `method` end to end: source pre-training, then adaptation.
pub fn adapt(
    method: Method,
    seq: &DomainSequence,
    cfg: &AdaptConfig,
) -> Result<(Model, AdaptTrace)> {
    match method {
        Method::Stdw => stdw_adapt(seq, cfg),
        Method::Gst => gst_adapt(seq, cfg),
        Method::Direct => direct_adapt(seq, cfg),
    }
}
