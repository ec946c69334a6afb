//! Targeted merge-list corruptions: truncation, random deletion with
//! descendant closure, and the seeded shuffle permutation.
//!
//! Every procedure takes a model and returns a new one; inputs are never
//! mutated. All randomness flows through an explicit 64-bit seed.
//!
//! # Determinism contract
//!
//! Seeded corruptions draw from `ChaCha8Rng::seed_from_u64(seed)` and shuffle
//! with a top-down Fisher-Yates whose bounded draws use rejection sampling on
//! `next_u64`. Both pieces are platform-independent and pinned here, so a
//! seed identifies the same permutation on every build. Deletion initial
//! sets are the first `k` ranks of that shuffle, which makes sweeps over
//! increasing `k` under one seed produce nested deleted sets.

use std::collections::{BTreeSet, HashSet};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::model::{ModelError, TokenizerModel};

/// Declarative description of a corruption, serializable for CLI/batch use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorruptionSpec {
    Truncate { last_n: usize },
    Delete { seed: u64, initial_set_size: usize },
    Shuffle { seed: u64 },
}

/// What a corruption did to the merge list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionReport {
    /// Total rules removed; for deletions this is the closure size, which
    /// can only exceed the initial set size.
    pub deleted_rule_count: usize,
    /// Result tokens no surviving rule produces, in original rank order.
    pub deleted_token_strings: Vec<String>,
    pub surviving_merge_count: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CorruptionError {
    #[error("truncate: last_n {last_n} exceeds merge count {merges}")]
    TruncateOutOfRange { last_n: usize, merges: usize },
    #[error("delete: initial set size {size} exceeds merge count {merges}")]
    InitialSetOutOfRange { size: usize, merges: usize },
    #[error("model has an empty merge list")]
    EmptyMergeList,
    #[error("priorities are not a bijection on 0..{0}")]
    NotABijection(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A bijection on merge ranks; `priority(rank)` is the order in which the
/// shuffled encoder applies rules (lower first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankPermutation {
    priorities: Vec<u32>,
}

impl RankPermutation {
    pub fn identity(len: usize) -> Self {
        RankPermutation {
            priorities: (0..len as u32).collect(),
        }
    }

    pub fn from_priorities(priorities: Vec<u32>) -> Result<Self, CorruptionError> {
        let n = priorities.len();
        let mut seen = vec![false; n];
        for &p in &priorities {
            if (p as usize) >= n || seen[p as usize] {
                return Err(CorruptionError::NotABijection(n));
            }
            seen[p as usize] = true;
        }
        Ok(RankPermutation { priorities })
    }

    pub fn priority(&self, rank: u32) -> u32 {
        self.priorities[rank as usize]
    }

    pub fn len(&self) -> usize {
        self.priorities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priorities.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.priorities.len()];
        for (rank, &p) in self.priorities.iter().enumerate() {
            inv[p as usize] = rank as u32;
        }
        RankPermutation { priorities: inv }
    }
}

// Unbiased draw from 0..bound via rejection sampling.
fn bounded(rng: &mut impl RngCore, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let limit = ((u64::MAX as u128 + 1) / bound as u128) * bound as u128;
    loop {
        let v = rng.next_u64();
        if (v as u128) < limit {
            return v % bound;
        }
    }
}

// Fisher-Yates over 0..n, seeded as documented in the module header.
fn seeded_shuffle(n: usize, seed: u64) -> Vec<u32> {
    let mut items: Vec<u32> = (0..n as u32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = bounded(&mut rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
    items
}

/// The order in which ranks enter a deletion's initial set under `seed`;
/// `random_delete` with size `k` seeds from the first `k` entries.
pub fn deletion_order(model: &TokenizerModel, seed: u64) -> Vec<u32> {
    seeded_shuffle(model.merges().len(), seed)
}

/// The rank permutation defining the merge-shuffle tokenizer for `seed`.
pub fn make_shuffle_permutation(
    model: &TokenizerModel,
    seed: u64,
) -> Result<RankPermutation, CorruptionError> {
    let n = model.merges().len();
    if n == 0 {
        return Err(CorruptionError::EmptyMergeList);
    }
    Ok(RankPermutation {
        priorities: seeded_shuffle(n, seed),
    })
}

fn surviving_pairs(model: &TokenizerModel, deleted: &BTreeSet<u32>) -> Vec<(String, String)> {
    model
        .merges()
        .rules()
        .iter()
        .filter(|r| !deleted.contains(&r.rank))
        .map(|r| (r.left.clone(), r.right.clone()))
        .collect()
}

fn report_for(model: &TokenizerModel, deleted: &BTreeSet<u32>) -> CorruptionReport {
    let surviving_results: HashSet<&str> = model
        .merges()
        .rules()
        .iter()
        .filter(|r| !deleted.contains(&r.rank))
        .map(|r| r.result.as_str())
        .collect();
    let mut seen = HashSet::new();
    let mut deleted_token_strings = Vec::new();
    for &rank in deleted {
        let result = &model.merges().rules()[rank as usize].result;
        if !surviving_results.contains(result.as_str()) && seen.insert(result.clone()) {
            deleted_token_strings.push(result.clone());
        }
    }
    CorruptionReport {
        deleted_rule_count: deleted.len(),
        deleted_token_strings,
        surviving_merge_count: model.merges().len() - deleted.len(),
    }
}

/// Drop the last `last_n` merges. Because ranks are a topological order, the
/// surviving rules can only reference surviving results and alphabet
/// symbols. Tokens produced only by deleted rules stay in the vocabulary,
/// flagged merge-unreachable.
pub fn truncate(
    model: &TokenizerModel,
    last_n: usize,
) -> Result<(TokenizerModel, CorruptionReport), CorruptionError> {
    let merges = model.merges().len();
    if last_n > merges {
        return Err(CorruptionError::TruncateOutOfRange { last_n, merges });
    }
    let deleted: BTreeSet<u32> = ((merges - last_n) as u32..merges as u32).collect();
    let report = report_for(model, &deleted);
    let corrupted = model.with_merges(surviving_pairs(model, &deleted))?;
    Ok((corrupted, report))
}

/// Delete an explicit initial rule set together with its descendant closure.
pub fn delete_rules(
    model: &TokenizerModel,
    initial: impl IntoIterator<Item = u32>,
) -> Result<(TokenizerModel, CorruptionReport), CorruptionError> {
    let deleted = model
        .merges()
        .descendants(initial)
        .map_err(CorruptionError::Model)?;
    let report = report_for(model, &deleted);
    let corrupted = model.with_merges(surviving_pairs(model, &deleted))?;
    Ok((corrupted, report))
}

/// Sample `initial_set_size` ranks without replacement under `seed`, then
/// delete their descendant closure. Survivors keep their original relative
/// order.
pub fn random_delete(
    model: &TokenizerModel,
    seed: u64,
    initial_set_size: usize,
) -> Result<(TokenizerModel, CorruptionReport), CorruptionError> {
    let merges = model.merges().len();
    if initial_set_size > merges {
        return Err(CorruptionError::InitialSetOutOfRange {
            size: initial_set_size,
            merges,
        });
    }
    let order = seeded_shuffle(merges, seed);
    delete_rules(model, order[..initial_set_size].iter().copied())
}

impl CorruptionSpec {
    /// Run the corruption. `Shuffle` leaves the stored model unchanged (the
    /// permutation applies at encode time) and reports zero deletions.
    pub fn apply(
        &self,
        model: &TokenizerModel,
    ) -> Result<(TokenizerModel, CorruptionReport), CorruptionError> {
        match *self {
            CorruptionSpec::Truncate { last_n } => truncate(model, last_n),
            CorruptionSpec::Delete {
                seed,
                initial_set_size,
            } => random_delete(model, seed, initial_set_size),
            CorruptionSpec::Shuffle { seed } => {
                make_shuffle_permutation(model, seed)?;
                let report = CorruptionReport {
                    deleted_rule_count: 0,
                    deleted_token_strings: Vec::new(),
                    surviving_merge_count: model.merges().len(),
                };
                Ok((model.clone(), report))
            }
        }
    }
}
