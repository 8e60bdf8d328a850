//! Synthetic sequences whose shift parameter moves linearly across domains.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{rotate_flat_images, Domain, DomainSequence, EvalSplit, Sample};
use crate::error::{Error, Result};
use crate::seed;
use crate::tensor::Tensor2;

/// Shift parameter of domain `t` out of `n_domains`: `start + t·(end−start)/(n−1)`.
pub fn linear_shift(start: f64, end: f64, t: usize, n_domains: usize) -> f64 {
    if n_domains < 2 {
        return start;
    }
    start + t as f64 * (end - start) / (n_domains - 1) as f64
}

/// Rotates `(x, y)` counter-clockwise by `degrees` about the origin.
pub fn rotate_point(x: f64, y: f64, degrees: f64) -> (f64, f64) {
    let (s, c) = degrees.to_radians().sin_cos();
    (c * x - s * y, s * x + c * y)
}

/// Train and eval RNGs for domain `t`: seed ⊕ t, on separate streams.
fn domain_rngs(seed: u64, t: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let train = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
    let mut eval = ChaCha8Rng::seed_from_u64(seed ^ t as u64);
    eval.set_stream(1);
    (train, eval)
}

fn check_counts(n_domains: usize, samples_per_domain: usize) -> Result<()> {
    if n_domains < 2 {
        return Err(Error::Config(format!(
            "need at least 2 domains, got {n_domains}"
        )));
    }
    if samples_per_domain < 20 {
        return Err(Error::Config(format!(
            "need at least 20 samples per domain, got {samples_per_domain}"
        )));
    }
    Ok(())
}

/// Centered two-moons draw: labels alternate so classes are balanced.
fn moons(rng: &mut ChaCha8Rng, count: usize, noise: &Normal<f64>) -> Vec<([f64; 2], usize)> {
    (0..count)
        .map(|i| {
            let label = i % 2;
            let t = rng.random_range(0.0..PI);
            let (x, y) = if label == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            let p = [x - 0.5 + noise.sample(rng), y - 0.25 + noise.sample(rng)];
            (p, label)
        })
        .collect()
}

fn assemble(
    train: Vec<(Vec<f64>, usize)>,
    eval: Vec<(Vec<f64>, usize)>,
    t: usize,
    shift: f64,
) -> Result<(Domain, EvalSplit)> {
    let samples = train
        .into_iter()
        .map(|(features, y)| Sample {
            features,
            label: (t == 0).then_some(y),
        })
        .collect();
    let (rows, labels): (Vec<_>, Vec<_>) = eval.into_iter().unzip();
    Ok((
        Domain::new(t, samples, shift)?,
        EvalSplit::new(Tensor2::from_rows(&rows)?, labels)?,
    ))
}

/// Two-moons domains rotated from `angle_start` to `angle_end` degrees.
pub fn gen_rotating_moons(
    n_domains: usize,
    angle_start: f64,
    angle_end: f64,
    samples_per_domain: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<DomainSequence> {
    check_counts(n_domains, samples_per_domain)?;
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::Config(format!(
            "noise_sd must be >= 0, got {noise_sd}"
        )));
    }
    let noise = Normal::new(0.0, noise_sd).expect("validated sd");
    let mut domains = Vec::with_capacity(n_domains);
    let mut evals = Vec::with_capacity(n_domains);
    for t in 0..n_domains {
        let angle = linear_shift(angle_start, angle_end, t, n_domains);
        let (mut train_rng, mut eval_rng) = domain_rngs(seed, t);
        let rotate = |pts: Vec<([f64; 2], usize)>| {
            pts.into_iter()
                .map(|([x, y], label)| {
                    let (rx, ry) = rotate_point(x, y, angle);
                    (vec![rx, ry], label)
                })
                .collect::<Vec<_>>()
        };
        let train = rotate(moons(&mut train_rng, samples_per_domain, &noise));
        let eval = rotate(moons(&mut eval_rng, samples_per_domain, &noise));
        let (d, e) = assemble(train, eval, t, angle)?;
        domains.push(d);
        evals.push(e);
    }
    DomainSequence::new(domains, evals, 2)
}

const BLOB_CLASSES: usize = 3;
const BLOB_RADIUS: f64 = 1.5;
const BLOB_SD: f64 = 0.5;

fn blobs(rng: &mut ChaCha8Rng, count: usize, offset: f64) -> Vec<(Vec<f64>, usize)> {
    let noise = Normal::new(0.0, BLOB_SD).expect("positive sd");
    (0..count)
        .map(|i| {
            let label = i % BLOB_CLASSES;
            let theta = PI / 2.0 + 2.0 * PI * label as f64 / BLOB_CLASSES as f64;
            let features = vec![
                BLOB_RADIUS * theta.cos() + noise.sample(rng) + offset,
                BLOB_RADIUS * theta.sin() + noise.sample(rng) + offset,
            ];
            (features, label)
        })
        .collect()
}

/// Three Gaussian blobs in 2-D, every feature translated by the per-domain offset.
pub fn gen_intensity_shift(
    n_domains: usize,
    offset_start: f64,
    offset_end: f64,
    samples_per_domain: usize,
    seed: u64,
) -> Result<DomainSequence> {
    check_counts(n_domains, samples_per_domain)?;
    let mut domains = Vec::with_capacity(n_domains);
    let mut evals = Vec::with_capacity(n_domains);
    for t in 0..n_domains {
        let offset = linear_shift(offset_start, offset_end, t, n_domains);
        let (mut train_rng, mut eval_rng) = domain_rngs(seed, t);
        let train = blobs(&mut train_rng, samples_per_domain, offset);
        let eval = blobs(&mut eval_rng, samples_per_domain, offset);
        let (d, e) = assemble(train, eval, t, offset)?;
        domains.push(d);
        evals.push(e);
    }
    DomainSequence::new(domains, evals, BLOB_CLASSES)
}

/// Fraction of each image-domain subset held out for evaluation.
const IMAGE_EVAL_FRACTION: f64 = 0.2;

/// Builds a rotated-image sequence from disjoint random subsets of a base set.
///
/// Each domain draws `per_domain` images; the first 80% form the training
/// split and the rest the labeled eval split.
#[allow(clippy::too_many_arguments)]
pub fn make_rotated_sequence(
    images: &Tensor2,
    labels: &[usize],
    side: usize,
    n_domains: usize,
    angle_start: f64,
    angle_end: f64,
    per_domain: usize,
    seed: u64,
) -> Result<DomainSequence> {
    if images.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} images but {} labels",
            images.rows(),
            labels.len()
        )));
    }
    if n_domains < 2 {
        return Err(Error::Config(format!(
            "need at least 2 domains, got {n_domains}"
        )));
    }
    if per_domain < 2 {
        return Err(Error::Config("need at least 2 images per domain".into()));
    }
    let needed = per_domain
        .checked_mul(n_domains)
        .ok_or_else(|| Error::Config("per_domain * n_domains overflows".into()))?;
    if needed > images.rows() {
        return Err(Error::Config(format!(
            "{n_domains} domains of {per_domain} images need {needed}, base set has {}",
            images.rows()
        )));
    }
    let class_count = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
    let mut order: Vec<usize> = (0..images.rows()).collect();
    order.shuffle(&mut seed::rng(seed));
    let n_eval =
        ((per_domain as f64 * IMAGE_EVAL_FRACTION).round() as usize).clamp(1, per_domain - 1);
    let n_train = per_domain - n_eval;

    let mut domains = Vec::with_capacity(n_domains);
    let mut evals = Vec::with_capacity(n_domains);
    for (t, subset) in order.chunks(per_domain).take(n_domains).enumerate() {
        let angle = linear_shift(angle_start, angle_end, t, n_domains);
        let rotated = rotate_flat_images(&images.select_rows(subset), side, angle)?;
        let samples = (0..n_train)
            .map(|i| Sample {
                features: rotated.row(i).to_vec(),
                label: (t == 0).then_some(labels[subset[i]]),
            })
            .collect();
        let eval_rows: Vec<usize> = (n_train..per_domain).collect();
        let eval_labels = subset[n_train..].iter().map(|&i| labels[i]).collect();
        domains.push(Domain::new(t, samples, angle)?);
        evals.push(EvalSplit::new(
            rotated.select_rows(&eval_rows),
            eval_labels,
        )?);
    }
    DomainSequence::new(domains, evals, class_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_features(rows: impl Iterator<Item = Vec<f64>>) -> (Vec<f64>, Vec<f64>, usize) {
        let rows: Vec<Vec<f64>> = rows.collect();
        let n = rows.len();
        let d = rows[0].len();
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let sd: Vec<f64> = (0..d)
            .map(|j| {
                (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            })
            .collect();
        (mean, sd, n)
    }

    #[test]
    fn zero_span_moons_domains_share_distribution() {
        let seq = gen_rotating_moons(2, 0.0, 0.0, 400, 0.1, 5).unwrap();
        assert_eq!(seq.shift_params(), vec![0.0, 0.0]);
        let (m0, sd0, n) =
            mean_features(seq.domain(0).samples().iter().map(|s| s.features.clone()));
        let (m1, _, _) = mean_features(seq.domain(1).samples().iter().map(|s| s.features.clone()));
        for j in 0..2 {
            let se = sd0[j] * (2.0 / n as f64).sqrt();
            assert!((m0[j] - m1[j]).abs() < 4.0 * se);
        }
    }

    #[test]
    fn full_turn_matches_zero_rotation() {
        let a = gen_rotating_moons(2, 0.0, 0.0, 40, 0.1, 9).unwrap();
        let b = gen_rotating_moons(2, 360.0, 360.0, 40, 0.1, 9).unwrap();
        for t in 0..2 {
            for (x, y) in a
                .domain(t)
                .features()
                .data()
                .iter()
                .zip(b.domain(t).features().data())
            {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn moons_angle_gap_is_ten_degrees() {
        let seq = gen_rotating_moons(13, 0.0, 120.0, 20, 0.1, 1).unwrap();
        let angles = seq.shift_params();
        assert_eq!(angles.len(), 13);
        assert_eq!(angles[12], 120.0);
        for w in angles.windows(2) {
            assert!((w[1] - w[0] - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn moons_labels_balanced_and_only_on_source() {
        let seq = gen_rotating_moons(3, 0.0, 30.0, 100, 0.1, 2).unwrap();
        let ones = seq
            .domain(0)
            .samples()
            .iter()
            .filter(|s| s.label == Some(1))
            .count();
        assert_eq!(ones, 50);
        assert!(!seq.domain(1).has_any_label());
        assert!(!seq.domain(2).has_any_label());
        assert_eq!(seq.eval(2).labels.iter().filter(|&&y| y == 1).count(), 50);
    }

    #[test]
    fn earlier_domains_unaffected_by_domain_count() {
        let a = gen_rotating_moons(3, 0.0, 20.0, 30, 0.1, 4).unwrap();
        let b = gen_rotating_moons(5, 0.0, 40.0, 30, 0.1, 4).unwrap();
        assert_eq!(a.domain(1), b.domain(1));
    }

    #[test]
    fn generator_config_errors() {
        assert!(gen_rotating_moons(1, 0.0, 1.0, 100, 0.1, 0).is_err());
        assert!(gen_rotating_moons(3, 0.0, 1.0, 10, 0.1, 0).is_err());
        assert!(gen_rotating_moons(3, 0.0, 1.0, 100, -0.1, 0).is_err());
        assert!(gen_intensity_shift(0, 0.0, 1.0, 100, 0).is_err());
        // degenerate identical domains are allowed
        assert!(gen_rotating_moons(4, 10.0, 10.0, 100, 0.1, 0).is_ok());
    }

    #[test]
    fn intensity_offsets_linspace() {
        let seq = gen_intensity_shift(5, 0.0, 1.0, 30, 3).unwrap();
        assert_eq!(seq.shift_params(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(seq.class_count(), 3);
        let flat = gen_intensity_shift(3, 0.0, 0.0, 30, 3).unwrap();
        assert_eq!(flat.shift_params(), vec![0.0; 3]);
    }

    #[test]
    fn removing_offset_recovers_source_statistics() {
        let seq = gen_intensity_shift(5, 0.0, 1.0, 600, 11).unwrap();
        let src = &seq.eval(0);
        let (m0, sd0, n0) = mean_features(src.features.iter_rows().map(<[f64]>::to_vec));
        let tgt = &seq.eval(4);
        let (m4, _, _) = mean_features(
            tgt.features
                .iter_rows()
                .map(|r| r.iter().map(|v| v - 1.0).collect()),
        );
        for j in 0..2 {
            let se = sd0[j] * (2.0 / n0 as f64).sqrt();
            assert!((m0[j] - m4[j]).abs() < 3.0 * se, "feature {j}");
        }
    }

    fn toy_images(count: usize, side: usize) -> (Tensor2, Vec<usize>) {
        let data = (0..count * side * side)
            .map(|i| (i % 7) as f64 / 7.0)
            .collect();
        (
            Tensor2::new(count, side * side, data).unwrap(),
            (0..count).map(|i| i % 10).collect(),
        )
    }

    #[test]
    fn rotated_sequence_endpoints_and_disjoint_subsets() {
        let (imgs, labels) = toy_images(100, 4);
        let seq = make_rotated_sequence(&imgs, &labels, 4, 2, 0.0, 45.0, 50, 3).unwrap();
        assert_eq!(seq.shift_params(), vec![0.0, 45.0]);
        assert_eq!(seq.class_count(), 10);
        assert_eq!(seq.domain(0).len(), 40);
        assert_eq!(seq.eval(1).len(), 10);
        assert!(seq.domain(0).is_labeled());
        assert!(!seq.domain(1).has_any_label());
        // source features are unrotated copies of base rows
        let first = seq.domain(0).samples()[0].features.clone();
        assert!(imgs
            .iter_rows()
            .any(|r| r.iter().zip(&first).all(|(a, b)| (a - b).abs() < 1e-12)));
        let again = make_rotated_sequence(&imgs, &labels, 4, 2, 0.0, 45.0, 50, 3).unwrap();
        assert_eq!(seq, again);
    }

    #[test]
    fn rotated_subsets_are_pairwise_disjoint() {
        let side = 3;
        let count = 60;
        let data = (0..count)
            .flat_map(|i| std::iter::repeat_n(i as f64, side * side))
            .collect();
        let imgs = Tensor2::new(count, side * side, data).unwrap();
        let labels: Vec<usize> = (0..count).map(|i| i % 2).collect();
        let seq = make_rotated_sequence(&imgs, &labels, side, 4, 0.0, 0.0, 15, 8).unwrap();
        let mut ids: Vec<i64> = Vec::new();
        for t in 0..4 {
            ids.extend(
                seq.domain(t)
                    .features()
                    .iter_rows()
                    .map(|r| r[4].round() as i64),
            );
            ids.extend(
                seq.eval(t)
                    .features
                    .iter_rows()
                    .map(|r| r[4].round() as i64),
            );
        }
        let total = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), total);
        assert_eq!(total, 60);
    }

    #[test]
    fn rotated_sequence_rejects_oversubscription() {
        let (imgs, labels) = toy_images(100, 4);
        assert!(matches!(
            make_rotated_sequence(&imgs, &labels, 4, 3, 0.0, 45.0, 40, 3),
            Err(Error::Config(_))
        ));
    }
}
