use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::lyapunov_check;
use crate::error::Result;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCase {
    pub dim: usize,
    pub mu: f64,
    pub l: f64,
    pub eta: f64,
    pub violations: usize,
    pub v_initial: f64,
    pub v_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSuite {
    pub steps: usize,
    pub cases: Vec<LyapunovCase>,
    pub total_violations: usize,
}

/// Random quadratics with `η < 2μ/L²`, each run for `steps` gradient steps.
pub fn lyapunov_suite(count: usize, steps: usize, base_seed: u64) -> Result<LyapunovSuite> {
    let mut rng = seed::rng(base_seed);
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let dim = rng.random_range(2..=8);
        let mu = rng.random_range(0.1..1.0);
        let l = mu * rng.random_range(1.0..4.0);
        let eta = rng.random_range(0.05..0.95) * 2.0 * mu / (l * l);
        let out = lyapunov_check(dim, mu, l, eta, steps, seed::derive(base_seed, &[i as u64]))?;
        cases.push(LyapunovCase {
            dim,
            mu,
            l,
            eta,
            violations: out.violations,
            v_initial: out.v_trace[0],
            v_final: *out.v_trace.last().expect("initial value present"),
        });
    }
    let total_violations = cases.iter().map(|c| c.violations).sum();
    Ok(LyapunovSuite {
        steps,
        cases,
        total_violations,
    })
}
