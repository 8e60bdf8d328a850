//! Lyapunov decrease check for gradient descent on a strongly convex quadratic.
//!
//! For `f(θ) = ½ (θ−θ*)ᵀ H (θ−θ*)` with eigenvalues of `H` in `[μ, L]` and
//! `V(θ) = ½ |θ−θ*|²`, each step `θ ← θ − η∇f` satisfies
//! `V(θ') ≤ V(θ) − η(μ − ηL²/2)|θ−θ*|²`, a strict decrease when `η < 2μ/L²`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOutcome {
    pub violations: usize,
    /// `V` before the first step and after every step.
    pub v_trace: Vec<f64>,
}

/// Upper bound on `V(θ_{t+1})` given `V(θ_t)`.
pub fn decrease_bound(v: f64, mu: f64, l: f64, eta: f64) -> f64 {
    v - eta * (mu - eta * l * l / 2.0) * 2.0 * v
}

fn random_hessian(dim: usize, mu: f64, l: f64, rng: &mut rand_chacha::ChaCha8Rng) -> DMatrix<f64> {
    let mut eig: Vec<f64> = Uniform::new_inclusive(mu, l)
        .expect("mu <= l")
        .sample_iter(&mut *rng)
        .take(dim)
        .collect();
    eig[0] = mu;
    if dim > 1 {
        eig[dim - 1] = l;
    }
    let gauss = DMatrix::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(&mut *rng));
    let q = gauss.qr().q();
    &q * DMatrix::from_diagonal(&DVector::from_vec(eig)) * q.transpose()
}

/// Runs `steps` of gradient descent on a random quadratic whose Hessian
/// spectrum spans `[μ, L]`, counting steps that break the decrease bound.
pub fn lyapunov_check(
    dim: usize,
    mu: f64,
    l: f64,
    eta: f64,
    steps: usize,
    seed: u64,
) -> Result<LyapunovOutcome> {
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    if !(mu > 0.0 && mu <= l && l.is_finite()) {
        return Err(Error::Config(format!(
            "need 0 < mu <= L, got mu={mu}, L={l}"
        )));
    }
    if !(eta > 0.0 && eta < 2.0 / l) {
        return Err(Error::Config(format!(
            "step size {eta} outside (0, 2/L) = (0, {})",
            2.0 / l
        )));
    }
    let mut rng = seed::rng(seed);
    let h = random_hessian(dim, mu, l, &mut rng);
    let optimum = DVector::<f64>::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
    let mut theta =
        &optimum + DVector::from_fn(dim, |_, _| -> f64 { StandardNormal.sample(&mut rng) });

    let v_of = |theta: &DVector<f64>| 0.5 * (theta - &optimum).norm_squared();
    let mut v = v_of(&theta);
    let mut v_trace = Vec::with_capacity(steps + 1);
    v_trace.push(v);
    let mut violations = 0;
    for _ in 0..steps {
        let grad = &h * (&theta - &optimum);
        theta -= eta * grad;
        let next = v_of(&theta);
        if next > decrease_bound(v, mu, l, eta) + SLACK {
            violations += 1;
        }
        v_trace.push(next);
        v = next;
    }
    Ok(LyapunovOutcome {
        violations,
        v_trace,
    })
}
