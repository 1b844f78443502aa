//! Minimum dominating set with random weights and parity counting.
//!
//! Homomorphisms into the Taken / Allowed / Forbidden pattern with `R = {T}`
//! number `Σ_T 2^{u(T)}` over vertex sets `T`, where `u(T)` counts vertices
//! outside `T` with no neighbour in `T`. Modulo 2 only dominating sets survive,
//! so the parity of the count at `(|T|, ω(T))` is the parity of the number of
//! dominating sets of that size and weight.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hom_solver::{hom_occupancy, hom_table, HomInstance, HomOptions, PatternGraph};
use crate::tree_model::TreeModel;

/// The generator behind every weight draw.
pub const RNG_NAME: &str = "ChaCha8Rng::seed_from_u64";

/// Default number of independent trials.
pub const DEFAULT_TRIALS: usize = 20;

/// Vertex weights drawn uniformly from `[1, 2n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomWeights {
    pub seed: u64,
    pub weights: Vec<u64>,
}

pub fn sample_weights(n: usize, seed: u64) -> DomWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = 2 * n.max(1) as u64;
    DomWeights { seed, weights: (0..n).map(|_| rng.gen_range(1..=top)).collect() }
}

/// Seed of trial `i` derived from the run seed.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// State of `(T, label)` or `(F, label)` in guess bitmasks.
pub fn taf_state(forbidden: bool, label: usize, k: usize) -> usize {
    usize::from(forbidden) * k + label
}

fn instance(m: &TreeModel, w: &DomWeights) -> Result<HomInstance> {
    if 2 * m.k() > crate::engine::MAX_STATES {
        return Err(Error::capability(format!("2k = {} states exceed {}", 2 * m.k(), crate::engine::MAX_STATES)));
    }
    if w.weights.len() != m.n() {
        return Err(Error::domain(format!("{} weights for {} vertices", w.weights.len(), m.n())));
    }
    HomInstance::new(m.clone(), PatternGraph::taf()).with_weights(w.weights.clone())
}

/// Parity of the number of dominating sets of every size and weight; only
/// odd entries are kept.
pub fn parity_table(m: &TreeModel, w: &DomWeights) -> Result<BTreeMap<(usize, u64), bool>> {
    let table = hom_table(&instance(m, w)?, HomOptions::fast())?;
    Ok(table.counts.into_iter().filter(|(_, c)| c.is_odd()).map(|(k, _)| (k, true)).collect())
}

/// Parity of the number of dominating sets with `|D| = c` and `ω(D) = w`.
pub fn parity_count(m: &TreeModel, weights: &DomWeights, c: usize, w: u64) -> Result<bool> {
    Ok(parity_table(m, weights)?.contains_key(&(c, w)))
}

/// `a_{S,c,w}`: TAF partitions with no T-F edge, `|T| = c`, `ω(T) = w` and
/// per-label T/F occupancy at the root exactly `S`.
pub fn taf_occupancy(m: &TreeModel, w: &DomWeights) -> Result<BTreeMap<u32, BTreeMap<(usize, u64), BigUint>>> {
    hom_occupancy(&instance(m, w)?)
}

/// One trial: the smallest `c` with an odd count for some weight, or `n`.
pub fn single_trial(m: &TreeModel, seed: u64) -> Result<usize> {
    let w = sample_weights(m.n(), seed);
    let odd = parity_table(m, &w)?;
    Ok(odd.keys().map(|&(c, _)| c).min().unwrap_or(m.n()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomsetRun {
    pub answer: usize,
    /// Answer of each trial, in order.
    pub trials: Vec<usize>,
    pub seeds: Vec<u64>,
}

/// Minimum over `trials` independent trials. Never below the true minimum.
pub fn min_dominating_set(m: &TreeModel, trials: usize, seed: u64) -> Result<DomsetRun> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let seeds: Vec<u64> = (0..trials).map(|i| trial_seed(seed, i)).collect();
    let results = seeds.iter().map(|&s| single_trial(m, s)).collect::<Result<Vec<_>>>()?;
    Ok(DomsetRun { answer: *results.iter().min().expect("nonempty"), trials: results, seeds })
}
