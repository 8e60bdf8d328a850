use super::{eval_accuracy, pretrain_source, AdaptConfig, AdaptTrace, Method, StepRecord, TAG_GST};
use crate::data::{partition_batches_of, DomainSequence};
use crate::error::Result;
use crate::nn::{ce_loss_and_grad, Model, OptimState};
use crate::pseudo_label::{confidence_filter, hard_label, LabelSource, LabeledBatch};
use crate::seed;

/// Gradual self-training: per domain, label everything with the frozen
/// previous model, drop the least confident fraction, then refit.
pub fn gst_adapt(seq: &DomainSequence, cfg: &AdaptConfig) -> Result<(Model, AdaptTrace)> {
    let (mut model, mut opt) = pretrain_source(seq, cfg)?;
    let trace = run_gst(&mut model, &mut opt, seq, cfg, Method::Gst)?;
    Ok((model, trace))
}

/// Self-training straight from source to target, skipping intermediates.
pub fn direct_adapt(seq: &DomainSequence, cfg: &AdaptConfig) -> Result<(Model, AdaptTrace)> {
    let ends = seq.endpoints();
    let (mut model, mut opt) = pretrain_source(&ends, cfg)?;
    let trace = run_gst(&mut model, &mut opt, &ends, cfg, Method::Direct)?;
    Ok((model, trace))
}

pub fn run_gst(
    model: &mut Model,
    opt: &mut OptimState,
    seq: &DomainSequence,
    cfg: &AdaptConfig,
    method: Method,
) -> Result<AdaptTrace> {
    cfg.validate()?;
    let mut trace = AdaptTrace::new(method);
    trace.domain_accuracy.push(eval_accuracy(model, seq, 0)?);
    for t in 1..=seq.n() {
        let domain = seq.domain(t);
        let (labels, confidences) = hard_label(model, domain.features())?;
        let all = LabeledBatch {
            indices: (0..domain.len()).collect(),
            labels,
            confidences,
            source: LabelSource::Pseudo,
        };
        let kept = confidence_filter(&all, cfg.gst_drop_fraction)?;
        let mut step = 0;
        for epoch in 0..cfg.epochs {
            let plan = partition_batches_of(
                kept.len(),
                cfg.batch_size,
                seed::derive(cfg.seed, &[TAG_GST, t as u64, epoch as u64]),
            )?;
            for (b, positions) in plan.batches.iter().enumerate() {
                let idx: Vec<usize> = positions.iter().map(|&p| kept.indices[p]).collect();
                let y: Vec<usize> = positions.iter().map(|&p| kept.labels[p]).collect();
                let x = domain.batch_features(&idx)?;
                let cache = model.forward_cached(&x)?;
                let (loss, d) = ce_loss_and_grad(cache.logits(), &y, &vec![1.0; y.len()])?;
                let grads = model.backward(&cache, &d)?;
                opt.apply(model, &grads)?;
                trace.steps.push(StepRecord {
                    domain_t: t,
                    stage: 0,
                    rho: 1.0,
                    step,
                    left_batch: 0,
                    right_batch: b + 1,
                    loss_mixed: loss,
                    loss_left: 0.0,
                    loss_right: loss,
                });
                step += 1;
            }
        }
        trace.domain_accuracy.push(eval_accuracy(model, seq, t)?);
    }
    Ok(trace)
}
