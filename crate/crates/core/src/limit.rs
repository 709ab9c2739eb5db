//! Step limits and the random structures they generate.
//!
//! A step limit selects, for every index key `(i, p)` with `t = ‖p‖`, a set
//! of cell signatures in `[l]^{r([t])}`; the limit set is the union of the
//! corresponding hypercubes. Given a seed tuple on `[m]`, the coded edge
//! `b̄` under `(i, p)` is present iff the colours of the seed values at the
//! sets `{b_j : j ∈ B}`, `B ∈ r([t])`, form a selected signature.
//!
//! Because membership only depends on colours, and colours of independent
//! uniform values are independent and uniform on `[l]`, the probability of
//! any event about `N(F, m)` is a finite sum over colourings; this is how
//! [`embedding_measure`] obtains exact values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::coding::{decode, index_keys, DHypFamily, IndexKey};
use crate::combin::{self, binomial, factorial};
use crate::error::{Error, Result};
use crate::rational::Density;
use crate::seed::{local_subsets, sample_seed_on, SeedStream, SeedTuple, SubsetIndex};
use crate::structures::{
    automorphism_count, induced_type_counts, isomorphism_types, Signature, Structure, Tuple,
};

/// Colours `e_B ∈ [l]`, one per nonempty `B ⊆ [t]` in the order of
/// [`local_subsets`], so the length is `2^t - 1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellSignature(Vec<u32>);

impl CellSignature {
    pub fn new(t: usize, colors: Vec<u32>, l: u32) -> Result<Self> {
        if t == 0 || t > 16 || colors.len() != (1usize << t) - 1 {
            return Err(Error::domain(format!(
                "a cell signature for t = {t} needs {} colours, got {}",
                (1usize << t.min(16)).saturating_sub(1),
                colors.len()
            )));
        }
        if let Some(c) = colors.iter().find(|&&c| c == 0 || c > l) {
            return Err(Error::domain(format!("colour {c} outside [{l}]")));
        }
        Ok(CellSignature(colors))
    }

    pub(crate) fn from_raw(colors: Vec<u32>) -> Self {
        CellSignature(colors)
    }

    pub fn t(&self) -> usize {
        (self.0.len() + 1).trailing_zeros() as usize
    }

    pub fn colors(&self) -> &[u32] {
        &self.0
    }

    /// Colour of the component for the subset `b` of `[t]` (1-based).
    pub fn color_of(&self, b: &[usize]) -> Option<u32> {
        let mask = crate::seed::mask_of(b);
        local_subsets(self.t())
            .iter()
            .position(|&m| m == mask)
            .map(|p| self.0[p])
    }
}

impl std::borrow::Borrow<[u32]> for CellSignature {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for CellSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Every signature in `[l]^{r([t])}`, in lexicographic order.
pub fn all_signatures(t: usize, l: u32) -> Vec<CellSignature> {
    let len = (1usize << t) - 1;
    let mut out = Vec::new();
    combin::for_each_tuple(l as usize, len, |c| {
        out.push(CellSignature(c.iter().map(|&x| x as u32).collect()));
        true
    });
    out
}

/// An L-limit in step form at resolution `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepLimit {
    sig: Signature,
    resolution: u32,
    cells: BTreeMap<IndexKey, BTreeSet<CellSignature>>,
}

impl StepLimit {
    /// The limit selecting no cells; it generates empty structures.
    pub fn empty(sig: Signature, resolution: u32) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::domain("resolution must be at least 1"));
        }
        Ok(StepLimit {
            sig,
            resolution,
            cells: BTreeMap::new(),
        })
    }

    /// The limit selecting every cell; it generates complete structures.
    pub fn full(sig: Signature, resolution: u32) -> Result<Self> {
        Self::from_rule(sig, resolution, |_, _| true)
    }

    /// Selects exactly the signatures accepted by `rule`.
    pub fn from_rule(
        sig: Signature,
        resolution: u32,
        mut rule: impl FnMut(&IndexKey, &CellSignature) -> bool,
    ) -> Result<Self> {
        let mut f = Self::empty(sig, resolution)?;
        for key in index_keys(&f.sig) {
            let chosen: BTreeSet<_> = all_signatures(key.width(), resolution)
                .into_iter()
                .filter(|c| rule(&key, c))
                .collect();
            if !chosen.is_empty() {
                f.cells.insert(key, chosen);
            }
        }
        Ok(f)
    }

    /// One binary symbol at resolution 2: no loops, and the pair `{a, b}`
    /// is joined in both directions iff `y_{a,b} ≥ 1/2`.
    pub fn half_density_graph() -> Self {
        Self::from_rule(Signature::binary(), 2, |key, c| {
            key.width() == 2 && c.colors()[2] == 2
        })
        .expect("valid limit")
    }

    pub fn select(&mut self, key: IndexKey, cell: CellSignature) -> Result<()> {
        if key.symbol >= self.sig.len() || key.partition.t() != self.sig.arity(key.symbol) {
            return Err(Error::domain("index key does not fit the signature"));
        }
        if cell.t() != key.width() {
            return Err(Error::domain(format!(
                "signature for t = {} under a key of width {}",
                cell.t(),
                key.width()
            )));
        }
        if cell.0.iter().any(|&c| c > self.resolution) {
            return Err(Error::domain("signature colour above the resolution"));
        }
        self.cells.entry(key).or_default().insert(cell);
        Ok(())
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn cells(&self, key: &IndexKey) -> Option<&BTreeSet<CellSignature>> {
        self.cells.get(key)
    }

    /// Keys with at least one selected cell.
    pub fn selected(&self) -> impl Iterator<Item = (&IndexKey, &BTreeSet<CellSignature>)> + '_ {
        self.cells.iter().filter(|(_, c)| !c.is_empty())
    }

    /// Lebesgue measure of the limit set under `key`.
    pub fn measure(&self, key: &IndexKey) -> Density {
        let selected = self.cells.get(key).map_or(0, BTreeSet::len) as u128;
        let total = (self.resolution as u128).pow(((1u32 << key.width()) - 1) as u32);
        Density::fraction(selected, total)
    }
}

/// Builds `N(F, m, ·)` from the colour of every subset in `index`.
pub(crate) fn realize_colored(f: &StepLimit, index: &SubsetIndex, colors: &[u32]) -> Structure {
    let m = index.ground();
    let mut edges: BTreeMap<IndexKey, BTreeSet<Tuple>> = BTreeMap::new();
    for (key, cells) in f.selected() {
        let t = key.width();
        let local = local_subsets(t);
        let mut sig = vec![0u32; local.len()];
        let mut found = BTreeSet::new();
        combin::for_each_injection(m, t, |b| {
            for (slot, &lm) in sig.iter_mut().zip(&local) {
                let mut em = 0u64;
                for (pos, &v) in b.iter().enumerate() {
                    if lm >> pos & 1 == 1 {
                        em |= 1u64 << (v - 1);
                    }
                }
                *slot = colors[index.position(em).expect("index covers r_max")];
            }
            if cells.contains(sig.as_slice()) {
                found.insert(b.to_vec());
            }
            true
        });
        if !found.is_empty() {
            edges.insert(key.clone(), found);
        }
    }
    let family = DHypFamily::new(f.sig.clone(), m, edges).expect("edges are distinct tuples");
    decode(&family)
}

fn check_seed(f: &StepLimit, m: usize, seed: &SeedTuple) -> Result<()> {
    let idx = seed.index();
    if idx.ground() != m {
        return Err(Error::domain(format!(
            "seed is indexed by subsets of [{}], not [{m}]",
            idx.ground()
        )));
    }
    if idx.cap() < f.sig.r_max() {
        return Err(Error::domain(format!(
            "seed covers subsets up to size {}, limit needs {}",
            idx.cap(),
            f.sig.r_max()
        )));
    }
    Ok(())
}

/// The structure `N(F, m, ȳ)`.
pub fn realize(f: &StepLimit, m: usize, seed: &SeedTuple) -> Result<Structure> {
    check_seed(f, m, seed)?;
    let colors = seed.colors(f.resolution)?;
    Ok(realize_colored(f, seed.index(), &colors))
}

/// A sample of `N(F, m)`: [`realize`] on a fresh seed drawn from `stream`.
pub fn sample_structure(f: &StepLimit, m: usize, stream: &SeedStream) -> Result<Structure> {
    if m == 0 {
        return Err(Error::domain("cannot sample on an empty universe"));
    }
    let index = Arc::new(SubsetIndex::new(m, f.sig.r_max())?);
    realize(f, m, &sample_seed_on(index, stream)?)
}

/// Largest number of colourings [`embedding_measure`] will enumerate.
pub const COLORING_BUDGET: u128 = 100_000_000;

/// Exact measure of the set of seeds `ȳ` for which the identity map is an
/// embedding of `m` into `N(F, ‖m‖, ȳ)`, i.e. for which the realized
/// structure equals `m`.
///
/// Enumerates all `l^{|r([‖m‖], r_max)|}` colourings and fails with
/// [`Error::Resource`] beyond [`COLORING_BUDGET`].
pub fn embedding_measure(m: &Structure, f: &StepLimit) -> Result<Density> {
    if m.signature() != &f.sig {
        return Err(Error::SignatureMismatch);
    }
    let index = SubsetIndex::new(m.size(), f.sig.r_max())?;
    let l = f.resolution;
    let total = (l as u128)
        .checked_pow(index.len() as u32)
        .filter(|&n| n <= COLORING_BUDGET)
        .ok_or_else(|| {
            Error::Resource(format!(
                "{l}^{} colourings exceed the budget of {COLORING_BUDGET}",
                index.len()
            ))
        })?;
    let mut hits = 0u128;
    combin::for_each_tuple(l as usize, index.len(), |c| {
        let colors: Vec<u32> = c.iter().map(|&x| x as u32).collect();
        if realize_colored(f, &index, &colors) == *m {
            hits += 1;
        }
        true
    });
    Ok(Density::fraction(hits, total))
}

/// Probability that `N(F, ‖m‖) ≃ m`: the embedding measure times
/// `‖m‖! / |Aut(m)|`. This is also the limit of `p(m, N(F, n))`.
pub fn induced_density(m: &Structure, f: &StepLimit) -> Result<Density> {
    let measure = embedding_measure(m, f)?;
    let scaled =
        measure.ratio() * num_rational::Ratio::new(factorial(m.size()), automorphism_count(m));
    Density::from_ratio(scaled)
}

/// Number of seeds among `samples` independent draws for which the identity
/// is an embedding of `m` into the realized structure. Replica `i` uses
/// `stream.split(i)`, so the count does not depend on thread scheduling.
pub fn monte_carlo_embedding(
    m: &Structure,
    f: &StepLimit,
    samples: u64,
    stream: &SeedStream,
) -> Result<u64> {
    if m.signature() != &f.sig {
        return Err(Error::SignatureMismatch);
    }
    if m.size() == 0 {
        return Ok(samples);
    }
    let index = Arc::new(SubsetIndex::new(m.size(), f.sig.r_max())?);
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<u64> {
            let seed = sample_seed_on(Arc::clone(&index), &stream.split(i))?;
            let colors = seed.colors(f.resolution)?;
            Ok(u64::from(realize_colored(f, &index, &colors) == *m))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(hits)
}

/// Per-size summary of a convergence run.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    pub samples: usize,
    /// Mean of `p(type, N)` over the samples, per type.
    pub mean_p: Vec<f64>,
    /// Mean of `|p(type, N) - exact|` over the samples, per type.
    pub mean_abs_dev: Vec<f64>,
    /// Mean over samples of `Σ_types |p(type, N) - exact|`.
    pub aggregate_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    /// Isomorphism types of size `1..=max_k`, in canonical order per size.
    pub types: Vec<Structure>,
    pub exact: Vec<Density>,
    pub rows: Vec<ConvergenceRow>,
}

/// Samples `N(F, m)` for each `m` in `sizes` and compares the induced
/// densities of every type of size at most `max_k` with [`induced_density`].
///
/// Size `m` uses `stream.split(m)` and its sample `i` uses a further
/// `split(i)`.
pub fn convergence_experiment(
    f: &StepLimit,
    max_k: usize,
    sizes: &[usize],
    samples: usize,
    stream: &SeedStream,
) -> Result<ConvergenceReport> {
    let mut types = Vec::new();
    for k in 1..=max_k {
        types.extend(isomorphism_types(&f.sig, k)?);
    }
    let exact = types
        .iter()
        .map(|t| induced_density(t, f))
        .collect::<Result<Vec<_>>>()?;
    let exact_f: Vec<f64> = exact.iter().map(|d| d.to_f64()).collect();

    let mut rows = Vec::with_capacity(sizes.len());
    for &m in sizes {
        let per_size = stream.split(m as u64);
        let observations: Vec<Vec<f64>> = (0..samples)
            .into_par_iter()
            .map(|i| -> Result<Vec<f64>> {
                let n = sample_structure(f, m, &per_size.split(i as u64))?;
                let mut counts = BTreeMap::new();
                for k in 1..=max_k.min(m) {
                    counts.extend(induced_type_counts(&n, k)?);
                }
                Ok(types
                    .iter()
                    .map(|t| {
                        let c = counts.get(t).copied().unwrap_or(0);
                        let total = binomial(m, t.size());
                        if total == 0 {
                            0.0
                        } else {
                            c as f64 / total as f64
                        }
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let denom = samples.max(1) as f64;
        let mut mean_p = vec![0.0; types.len()];
        let mut mean_abs_dev = vec![0.0; types.len()];
        let mut aggregate = 0.0;
        for obs in &observations {
            for (j, &p) in obs.iter().enumerate() {
                let dev = (p - exact_f[j]).abs();
                mean_p[j] += p / denom;
                mean_abs_dev[j] += dev / denom;
                aggregate += dev / denom;
            }
        }
        rows.push(ConvergenceRow {
            m,
            samples,
            mean_p,
            mean_abs_dev,
            aggregate_deviation: aggregate,
        });
    }
    Ok(ConvergenceReport { types, exact, rows })
}
