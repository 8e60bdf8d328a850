//! Cyclic batch matching between neighboring domains and the ρ schedules
//! that move loss weight from the previous domain to the current one.
//!
//! Batch indices here are 1-based; [`PairPlan::zero_based`] converts them for
//! slice access.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// `i(t) = (t mod n) + 1`.
pub fn left_index(t: usize, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Usage("left batch count must be at least 1".into()));
    }
    Ok(t % n + 1)
}

/// `j(t) = ((t + ⌊t/n⌋) mod m) + 1`.
pub fn right_index(t: usize, n: usize, m: usize) -> Result<usize> {
    if n == 0 || m == 0 {
        return Err(Error::Usage(format!(
            "batch counts must be at least 1, got n={n}, m={m}"
        )));
    }
    Ok((t + t / n) % m + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairPlan {
    pub n: usize,
    pub m: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl PairPlan {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs shifted to 0-based batch positions.
    pub fn zero_based(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().map(|&(i, j)| (i - 1, j - 1))
    }
}

/// The first `len` matched (left, right) batch pairs.
pub fn build_pair_plan(n: usize, m: usize, len: usize) -> Result<PairPlan> {
    if len == 0 {
        return Err(Error::Usage("pair plan length must be at least 1".into()));
    }
    let pairs = (0..len)
        .map(|t| Ok((left_index(t, n)?, right_index(t, n, m)?)))
        .collect::<Result<_>>()?;
    Ok(PairPlan { n, m, pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// `ρ_i = i / s`.
    Equal,
    /// Constant `fixed_value`.
    Fixed,
    /// Independent `U(0, 1)` draws.
    Rand,
    /// The `Rand` draws sorted ascending.
    Sorted,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 4] = [
        ScheduleKind::Equal,
        ScheduleKind::Fixed,
        ScheduleKind::Rand,
        ScheduleKind::Sorted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleKind::Equal => "equal",
            ScheduleKind::Fixed => "fixed",
            ScheduleKind::Rand => "rand",
            ScheduleKind::Sorted => "sorted",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScheduleKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown schedule {s:?}; expected equal, fixed, rand or sorted"
                ))
            })
    }
}

/// Per-stage mixing weights for one domain transition: `s + 1` values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoSchedule {
    pub kind: ScheduleKind,
    pub values: Vec<f64>,
    pub steps: usize,
    pub seed: u64,
    pub fixed_value: f64,
}

impl RhoSchedule {
    pub fn stages(&self) -> usize {
        self.values.len()
    }
}

pub fn make_rho_schedule(
    kind: ScheduleKind,
    steps: usize,
    seed: u64,
    fixed_value: f64,
) -> Result<RhoSchedule> {
    if steps == 0 {
        return Err(Error::Config("schedule steps must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&fixed_value) {
        return Err(Error::Config(format!(
            "fixed_value {fixed_value} outside [0, 1]"
        )));
    }
    let draws = || {
        let mut rng = seed::rng(seed);
        (0..=steps).map(|_| rng.random::<f64>()).collect::<Vec<_>>()
    };
    let values = match kind {
        ScheduleKind::Equal => (0..=steps).map(|i| i as f64 / steps as f64).collect(),
        ScheduleKind::Fixed => vec![fixed_value; steps + 1],
        ScheduleKind::Rand => draws(),
        ScheduleKind::Sorted => {
            let mut v = draws();
            v.sort_by(f64::total_cmp);
            v
        }
    };
    Ok(RhoSchedule {
        kind,
        values,
        steps,
        seed,
        fixed_value,
    })
}
