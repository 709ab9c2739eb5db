//! Subset-indexed seed tuples and the random source that fills them.
//!
//! A seed tuple assigns one uniform value to every nonempty subset of `[m]`
//! of size at most `cap`. Values are drawn from a counter-based stream keyed
//! by the subset itself, so a value does not depend on how many other
//! subsets were drawn or in which order.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::structures::check_permutation;

/// Largest ground set a subset index supports (subsets are `u64` masks).
pub const MAX_GROUND: usize = 64;

/// The nonempty subsets of `[ground]` with at most `cap` elements, ordered
/// by size and then lexicographically. Subsets are bitmasks with bit `v - 1`
/// standing for element `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetIndex {
    ground: usize,
    cap: usize,
    masks: Vec<u64>,
    position: HashMap<u64, usize>,
}

impl SubsetIndex {
    pub fn new(ground: usize, cap: usize) -> Result<Self> {
        if ground > MAX_GROUND {
            return Err(Error::Resource(format!(
                "ground set of size {ground} exceeds {MAX_GROUND}"
            )));
        }
        let masks: Vec<u64> = (1..=cap.min(ground))
            .flat_map(|s| (1..=ground).combinations(s))
            .map(|c| mask_of(&c))
            .collect();
        let position = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        Ok(SubsetIndex {
            ground,
            cap,
            masks,
            position,
        })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn position(&self, mask: u64) -> Option<usize> {
        self.position.get(&mask).copied()
    }

    pub fn members(&self, pos: usize) -> Vec<usize> {
        members_of(self.masks[pos])
    }
}

pub fn mask_of(elements: &[usize]) -> u64 {
    elements.iter().fold(0u64, |m, &v| m | 1u64 << (v - 1))
}

pub fn members_of(mask: u64) -> Vec<usize> {
    (0..64)
        .filter(|b| mask >> b & 1 == 1)
        .map(|b| b + 1)
        .collect()
}

/// Nonempty subsets of `[t]` as bitmasks over positions, by size then
/// lexicographically. This is the component order of cell signatures.
pub fn local_subsets(t: usize) -> Vec<u64> {
    (1..=t)
        .flat_map(|s| (1..=t).combinations(s))
        .map(|c| mask_of(&c))
        .collect()
}

/// Counter-based random source. `split` derives independent child streams;
/// `uniform_at` returns the value attached to a counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedStream {
    key: [u8; 32],
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream {
            key: ChaCha8Rng::seed_from_u64(seed).get_seed(),
        }
    }

    /// Child stream number `child`. Children of distinct indices, and the
    /// parent's own counters, do not overlap.
    pub fn split(&self, child: u64) -> SeedStream {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(child);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        SeedStream { key }
    }

    /// Uniform value in `[0, 1)` attached to `counter`.
    pub fn uniform_at(&self, counter: u64) -> f64 {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(counter);
        // Skip the first block, which `split` consumes.
        rng.set_word_pos(16);
        rng.gen::<f64>()
    }

    /// A sequential generator for draws that have no natural counter.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(u64::MAX);
        rng
    }
}

/// One value in `[0, 1]` per subset of a [`SubsetIndex`].
#[derive(Clone, Debug, PartialEq)]
pub struct SeedTuple {
    index: Arc<SubsetIndex>,
    values: Vec<f64>,
}

impl SeedTuple {
    pub fn new(index: Arc<SubsetIndex>, values: Vec<f64>) -> Result<Self> {
        if values.len() != index.len() {
            return Err(Error::domain(format!(
                "{} values for {} subsets",
                values.len(),
                index.len()
            )));
        }
        if let Some(y) = values.iter().find(|y| !(0.0..=1.0).contains(*y)) {
            return Err(Error::domain(format!("seed value {y} outside [0, 1]")));
        }
        Ok(SeedTuple { index, values })
    }

    pub fn index(&self) -> &SubsetIndex {
        &self.index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_of(&self, subset: &[usize]) -> Option<f64> {
        self.index.position(mask_of(subset)).map(|p| self.values[p])
    }

    /// Colour (`interval_of`) of every value at resolution `l`.
    pub fn colors(&self, l: u32) -> Result<Vec<u32>> {
        self.values.iter().map(|&y| interval_of(y, l)).collect()
    }

    /// The seed `ȳ∘π`, whose value at `S` is the value of `self` at `π(S)`;
    /// `perm[v - 1]` is the image of `v`.
    pub fn permuted(&self, perm: &[usize]) -> Result<SeedTuple> {
        check_permutation(perm, self.index.ground())?;
        let values = self
            .index
            .masks()
            .iter()
            .map(|&m| {
                let image: Vec<usize> = members_of(m).iter().map(|&v| perm[v - 1]).collect();
                self.values[self.index.position(mask_of(&image)).expect("same size")]
            })
            .collect();
        Ok(SeedTuple {
            index: Arc::clone(&self.index),
            values,
        })
    }
}

/// Index `a` of the interval containing `y`, where the unit interval is cut
/// into `l` pieces `[(a-1)/l, a/l)` and the last piece is closed at 1.
pub fn interval_of(y: f64, l: u32) -> Result<u32> {
    if l == 0 {
        return Err(Error::domain("resolution must be at least 1"));
    }
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::domain(format!("{y} is outside [0, 1]")));
    }
    let a = (y * l as f64).floor() as u32 + 1;
    Ok(a.min(l))
}

/// Independent uniform values for every subset of `[m]` of size at most
/// `cap`, the value of `S` drawn from the counter `mask(S)` of `stream`.
pub fn sample_seed(m: usize, cap: usize, stream: &SeedStream) -> Result<SeedTuple> {
    if m == 0 {
        return Err(Error::domain("seed tuples need a nonempty universe"));
    }
    let index = Arc::new(SubsetIndex::new(m, cap)?);
    sample_seed_on(index, stream)
}

/// As [`sample_seed`], reusing an existing index.
pub fn sample_seed_on(index: Arc<SubsetIndex>, stream: &SeedStream) -> Result<SeedTuple> {
    let values = index
        .masks()
        .iter()
        .map(|&m| stream.uniform_at(m))
        .collect();
    SeedTuple::new(index, values)
}
