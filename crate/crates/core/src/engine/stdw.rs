use super::{
    eval_accuracy, phi_step, pretrain_source, AdaptConfig, AdaptTrace, Method, StepRecord, TAG_RHO,
    TAG_STDW,
};
use crate::data::{partition_batches, DomainSequence};
use crate::error::Result;
use crate::nn::{Model, OptimState};
use crate::schedule::{build_pair_plan, make_rho_schedule};
use crate::seed;

/// ρ values for each stage of a transition. `steps == 0` gives the single
/// stage `[1.0]`: no migration, straight to the current domain.
pub fn rho_values(cfg: &AdaptConfig) -> Result<Vec<f64>> {
    if cfg.steps == 0 {
        return Ok(vec![1.0]);
    }
    Ok(make_rho_schedule(
        cfg.schedule,
        cfg.steps,
        seed::derive(cfg.seed, &[TAG_RHO]),
        cfg.fixed_value,
    )?
    .values)
}

/// Source pre-training followed by STDW over every neighboring pair.
pub fn stdw_adapt(seq: &DomainSequence, cfg: &AdaptConfig) -> Result<(Model, AdaptTrace)> {
    let (mut model, mut opt) = pretrain_source(seq, cfg)?;
    let trace = run_stdw(&mut model, &mut opt, seq, cfg)?;
    Ok((model, trace))
}

/// STDW from an already prepared model.
///
/// For each transition `(D_{t−1}, D_t)` and each ρ stage, both domains are
/// re-partitioned and `m·epochs` matched batch pairs are visited, where `m`
/// is the right domain's batch count.
pub fn run_stdw(
    model: &mut Model,
    opt: &mut OptimState,
    seq: &DomainSequence,
    cfg: &AdaptConfig,
) -> Result<AdaptTrace> {
    cfg.validate()?;
    let rhos = rho_values(cfg)?;
    let mut trace = AdaptTrace::new(Method::Stdw);
    trace.domain_accuracy.push(eval_accuracy(model, seq, 0)?);
    for t in 1..=seq.n() {
        let (left, right) = (seq.domain(t - 1), seq.domain(t));
        for (stage, &rho) in rhos.iter().enumerate() {
            let stage_seed =
                |side: u64| seed::derive(cfg.seed, &[TAG_STDW, t as u64, stage as u64, side]);
            let left_plan = partition_batches(left, cfg.batch_size, stage_seed(0))?;
            let right_plan = partition_batches(right, cfg.batch_size, stage_seed(1))?;
            let pairs = build_pair_plan(
                left_plan.len(),
                right_plan.len(),
                right_plan.len() * cfg.epochs,
            )?;
            for (k, ((i, j), &(li, rj))) in pairs.zero_based().zip(&pairs.pairs).enumerate() {
                let losses = phi_step(
                    model,
                    opt,
                    (left, &left_plan.batches[i]),
                    (right, &right_plan.batches[j]),
                    rho,
                )?;
                trace.steps.push(StepRecord {
                    domain_t: t,
                    stage,
                    rho,
                    step: k,
                    left_batch: li,
                    right_batch: rj,
                    loss_mixed: losses.mixed,
                    loss_left: losses.left,
                    loss_right: losses.right,
                });
            }
        }
        trace.domain_accuracy.push(eval_accuracy(model, seq, t)?);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_rotating_moons;
    use crate::schedule::ScheduleKind;

    fn small_cfg() -> AdaptConfig {
        AdaptConfig {
            steps: 2,
            epochs: 1,
            pretrain_epochs: 5,
            batch_size: 16,
            hidden: vec![8],
            ..AdaptConfig::default()
        }
    }

    #[test]
    fn trace_follows_schedule_and_pair_plan() {
        let seq = gen_rotating_moons(3, 0.0, 20.0, 40, 0.1, 2).unwrap();
        let cfg = small_cfg();
        let (_, trace) = stdw_adapt(&seq, &cfg).unwrap();
        // 40 samples / 16 = 3 batches per side, 3 stages, 2 transitions
        assert_eq!(trace.steps.len(), 2 * 3 * 3);
        let expected_pairs = build_pair_plan(3, 3, 3).unwrap().pairs;
        for (idx, rec) in trace.steps.iter().enumerate() {
            let t = idx / 9 + 1;
            let stage = (idx % 9) / 3;
            assert_eq!((rec.domain_t, rec.stage), (t, stage));
            assert_eq!(rec.rho, [0.0, 0.5, 1.0][stage]);
            assert_eq!((rec.left_batch, rec.right_batch), expected_pairs[idx % 3]);
        }
        assert_eq!(trace.domain_accuracy.len(), 3);
    }

    #[test]
    fn zero_steps_runs_single_target_stage() {
        let cfg = AdaptConfig {
            steps: 0,
            ..small_cfg()
        };
        assert_eq!(rho_values(&cfg).unwrap(), vec![1.0]);
        let cfg = AdaptConfig {
            schedule: ScheduleKind::Fixed,
            fixed_value: 0.25,
            ..small_cfg()
        };
        assert_eq!(rho_values(&cfg).unwrap(), vec![0.25; 3]);
    }

    #[test]
    fn rejects_invalid_config_before_training() {
        let seq = gen_rotating_moons(2, 0.0, 20.0, 40, 0.1, 2).unwrap();
        let cfg = AdaptConfig {
            epochs: 0,
            ..small_cfg()
        };
        assert!(matches!(
            stdw_adapt(&seq, &cfg),
            Err(crate::Error::Config(_))
        ));
    }
}
