use crate::data::Domain;
use crate::error::{Error, Result};
use crate::nn::{ce_loss_and_grad, Gradients, Model, OptimState};
use crate::pseudo_label::label_batch_dynamic;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLosses {
    pub mixed: f64,
    pub left: f64,
    pub right: f64,
}

/// Labels `batch` with the current model, returns its mean CE and gradients.
fn batch_loss_grads(model: &Model, domain: &Domain, batch: &[usize]) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::Usage(format!(
            "empty batch from domain {}",
            domain.index()
        )));
    }
    let labeled = label_batch_dynamic(model, domain, batch)?;
    let x = domain.batch_features(batch)?;
    let cache = model.forward_cached(&x)?;
    let (loss, dlogits) =
        ce_loss_and_grad(cache.logits(), &labeled.labels, &vec![1.0; batch.len()])?;
    Ok((loss, model.backward(&cache, &dlogits)?))
}

/// One self-training step on a single batch.
pub fn self_train_step(
    model: &mut Model,
    opt: &mut OptimState,
    domain: &Domain,
    batch: &[usize],
) -> Result<f64> {
    let (loss, grads) = batch_loss_grads(model, domain, batch)?;
    opt.apply(model, &grads)?;
    Ok(loss)
}

/// One optimizer step on `(1−ρ)·CE(left) + ρ·CE(right)`.
///
/// Both batches are labeled by the model before the update. At ρ = 0 (resp.
/// ρ = 1) the step is exactly the single-batch step on the left (right) batch.
pub fn phi_step(
    model: &mut Model,
    opt: &mut OptimState,
    left: (&Domain, &[usize]),
    right: (&Domain, &[usize]),
    rho: f64,
) -> Result<StepLosses> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Usage(format!("rho {rho} outside [0, 1]")));
    }
    let (left_loss, left_grads) = batch_loss_grads(model, left.0, left.1)?;
    let (right_loss, right_grads) = batch_loss_grads(model, right.0, right.1)?;
    let grads = if rho == 0.0 {
        left_grads
    } else if rho == 1.0 {
        right_grads
    } else {
        let mut g = left_grads;
        g.scale(1.0 - rho);
        g.add_scaled(&right_grads, rho);
        g
    };
    opt.apply(model, &grads)?;
    Ok(StepLosses {
        mixed: (1.0 - rho) * left_loss + rho * right_loss,
        left: left_loss,
        right: right_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_rotating_moons;
    use crate::nn::{ce_loss, init_model};
    use crate::pseudo_label::label_batch_dynamic;

    fn setup() -> (crate::data::DomainSequence, Model) {
        let seq = gen_rotating_moons(3, 0.0, 30.0, 40, 0.1, 3).unwrap();
        (seq, init_model(&[2, 16, 16], 2, 4).unwrap())
    }

    fn bits(m: &Model) -> Vec<u64> {
        m.params().iter().map(|v| v.to_bits()).collect()
    }

    #[test]
    fn degenerate_weights_match_single_batch_steps() {
        let (seq, model) = setup();
        let (l, r) = (seq.domain(1), seq.domain(2));
        let lb: Vec<usize> = (0..10).collect();
        let rb: Vec<usize> = (5..17).collect();
        for opt0 in [
            OptimState::sgd(0.05).unwrap(),
            OptimState::adam(0.01).unwrap(),
        ] {
            let (mut a, mut oa) = (model.clone(), opt0.clone());
            let (mut b, mut ob) = (model.clone(), opt0.clone());
            phi_step(&mut a, &mut oa, (l, &lb), (r, &rb), 0.0).unwrap();
            self_train_step(&mut b, &mut ob, l, &lb).unwrap();
            assert_eq!(bits(&a), bits(&b));

            let (mut a, mut oa) = (model.clone(), opt0.clone());
            let (mut b, mut ob) = (model.clone(), opt0.clone());
            phi_step(&mut a, &mut oa, (l, &lb), (r, &rb), 1.0).unwrap();
            self_train_step(&mut b, &mut ob, r, &rb).unwrap();
            assert_eq!(bits(&a), bits(&b));
        }
    }

    #[test]
    fn half_weight_is_mean_of_batch_losses() {
        let (seq, model) = setup();
        let (l, r) = (seq.domain(0), seq.domain(2));
        let lb: Vec<usize> = (0..8).collect();
        let rb: Vec<usize> = (20..28).collect();
        // oracle: CE over the concatenated equal-size batches with unit weights
        let yl = label_batch_dynamic(&model, l, &lb).unwrap().labels;
        let yr = label_batch_dynamic(&model, r, &rb).unwrap().labels;
        let x = l
            .batch_features(&lb)
            .unwrap()
            .vstack(&r.batch_features(&rb).unwrap())
            .unwrap();
        let y: Vec<usize> = yl.into_iter().chain(yr).collect();
        let expected = ce_loss(&model.forward(&x).unwrap(), &y, &[1.0; 16]).unwrap();

        let mut m = model.clone();
        let mut opt = OptimState::sgd(0.01).unwrap();
        let losses = phi_step(&mut m, &mut opt, (l, &lb), (r, &rb), 0.5).unwrap();
        assert!((losses.mixed - expected).abs() < 1e-12);
        assert!((losses.mixed - 0.5 * (losses.left + losses.right)).abs() < 1e-12);
    }

    #[test]
    fn mixed_gradient_matches_weighted_sample_oracle() {
        // the combined step equals one step on the concatenated batch whose
        // sample weights give each side (1−ρ) and ρ of the mass
        let (seq, model) = setup();
        let (l, r) = (seq.domain(1), seq.domain(2));
        let lb: Vec<usize> = (0..6).collect();
        let rb: Vec<usize> = (10..20).collect();
        let rho = 0.3;
        let yl = label_batch_dynamic(&model, l, &lb).unwrap().labels;
        let yr = label_batch_dynamic(&model, r, &rb).unwrap().labels;
        let x = l
            .batch_features(&lb)
            .unwrap()
            .vstack(&r.batch_features(&rb).unwrap())
            .unwrap();
        let y: Vec<usize> = yl.into_iter().chain(yr).collect();
        let w: Vec<f64> = std::iter::repeat_n((1.0 - rho) / 6.0, 6)
            .chain(std::iter::repeat_n(rho / 10.0, 10))
            .collect();
        let mut oracle = model.clone();
        let cache = oracle.forward_cached(&x).unwrap();
        let (_, d) = ce_loss_and_grad(cache.logits(), &y, &w).unwrap();
        oracle
            .backward_apply(&x, &d, &mut OptimState::sgd(0.1).unwrap())
            .unwrap();

        let mut m = model.clone();
        phi_step(
            &mut m,
            &mut OptimState::sgd(0.1).unwrap(),
            (l, &lb),
            (r, &rb),
            rho,
        )
        .unwrap();
        for (a, b) in m.params().iter().zip(oracle.params()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_rho_and_empty_batch() {
        let (seq, mut model) = setup();
        let mut opt = OptimState::sgd(0.1).unwrap();
        let b: Vec<usize> = vec![0, 1];
        let d = seq.domain(1);
        assert!(phi_step(&mut model, &mut opt, (d, &b), (d, &b), 1.5).is_err());
        assert!(phi_step(&mut model, &mut opt, (d, &[]), (d, &b), 0.5).is_err());
    }
}
