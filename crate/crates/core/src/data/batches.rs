use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Domain;
use crate::error::{Error, Result};
use crate::seed;

/// A seeded partition of a domain's indices into mini-batches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub batch_size: usize,
    pub batches: Vec<Vec<usize>>,
    pub seed: u64,
}

impl BatchPlan {
    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }
}

/// Shuffles `0..N` with `seed` and chunks it. The final batch may be short.
pub fn partition_batches(domain: &Domain, batch_size: usize, seed: u64) -> Result<BatchPlan> {
    partition_batches_of(domain.len(), batch_size, seed)
}

/// Partitions `0..n` directly, for index sets that are not a whole domain.
pub fn partition_batches_of(n: usize, batch_size: usize, seed: u64) -> Result<BatchPlan> {
    if batch_size == 0 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Usage("cannot partition an empty domain".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seed::rng(seed));
    Ok(BatchPlan {
        batch_size,
        batches: perm.chunks(batch_size).map(<[usize]>::to_vec).collect(),
        seed,
    })
}
