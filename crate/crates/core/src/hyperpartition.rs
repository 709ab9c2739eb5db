//! Finite `(t, l)`-hyperpartitions: an `l`-colouring of the `j`-element
//! subsets of `[N]` for every level `j ≤ t`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_rational::Ratio;

use crate::coding::{decode, DHypFamily, IndexKey};
use crate::combin::{self, factorial};
use crate::error::{Error, Result};
use crate::limit::{CellSignature, StepLimit};
use crate::rational::Rational;
use crate::seed::{local_subsets, mask_of, SeedTuple, SubsetIndex};
use crate::structures::{Structure, Tuple};

/// Colour classes are stored per subset, so relabelling a tuple only
/// permutes the components of its signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperpartition {
    index: Arc<SubsetIndex>,
    resolution: u32,
    colors: Vec<u32>,
}

impl Hyperpartition {
    /// Colours every subset of `[ground]` of size `1..=levels` with
    /// `color(subset)`, which must lie in `[resolution]`.
    pub fn from_fn(
        ground: usize,
        levels: usize,
        resolution: u32,
        mut color: impl FnMut(&[usize]) -> u32,
    ) -> Result<Self> {
        let index = SubsetIndex::new(ground, levels)?;
        let colors = (0..index.len()).map(|p| color(&index.members(p))).collect();
        Self::from_colors(Arc::new(index), resolution, colors)
    }

    /// `colors[k]` is the colour of the `k`-th subset of `index`.
    pub fn from_colors(index: Arc<SubsetIndex>, resolution: u32, colors: Vec<u32>) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::domain("resolution must be at least 1"));
        }
        if colors.len() != index.len() {
            return Err(Error::domain("one colour per subset is required"));
        }
        if let Some(c) = colors.iter().find(|&&c| c == 0 || c > resolution) {
            return Err(Error::domain(format!("colour {c} outside [{resolution}]")));
        }
        Ok(Hyperpartition {
            index,
            resolution,
            colors,
        })
    }

    /// Every subset gets colour 1.
    pub fn trivial(ground: usize, levels: usize) -> Result<Self> {
        Self::from_fn(ground, levels, 1, |_| 1)
    }

    pub fn ground(&self) -> usize {
        self.index.ground()
    }

    pub fn levels(&self) -> usize {
        self.index.cap()
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn color_of(&self, subset: &[usize]) -> Option<u32> {
        self.index.position(mask_of(subset)).map(|p| self.colors[p])
    }

    /// `e^H(x̄)`: for each nonempty `A ⊆ [u]`, the colour of `{x_i : i ∈ A}`.
    pub fn cell_signature(&self, x: &[usize]) -> Result<CellSignature> {
        let u = x.len();
        if u == 0 || u > self.levels() {
            return Err(Error::domain(format!(
                "tuple length {u} outside 1..={}",
                self.levels()
            )));
        }
        if x.iter().any(|&v| v == 0 || v > self.ground()) {
            return Err(Error::domain(format!("{x:?} leaves [{}]", self.ground())));
        }
        if mask_of(x).count_ones() as usize != u {
            return Err(Error::domain(format!("{x:?} repeats an entry")));
        }
        Ok(self.signature_unchecked(x, &local_subsets(u)))
    }

    fn signature_unchecked(&self, x: &[usize], local: &[u64]) -> CellSignature {
        let colors = local
            .iter()
            .map(|&lm| {
                let mut em = 0u64;
                for (pos, &v) in x.iter().enumerate() {
                    if lm >> pos & 1 == 1 {
                        em |= 1u64 << (v - 1);
                    }
                }
                self.colors[self.index.position(em).expect("size within levels")]
            })
            .collect();
        CellSignature::from_raw(colors)
    }

    /// All distinct-entry `u`-tuples grouped by signature. The groups
    /// partition `[N]^{\underline u}`.
    pub fn cells(&self, u: usize) -> Result<BTreeMap<CellSignature, BTreeSet<Tuple>>> {
        if u == 0 || u > self.levels() {
            return Err(Error::domain(format!(
                "tuple length {u} outside 1..={}",
                self.levels()
            )));
        }
        let local = local_subsets(u);
        let mut out: BTreeMap<CellSignature, BTreeSet<Tuple>> = BTreeMap::new();
        combin::for_each_injection(self.ground(), u, |x| {
            out.entry(self.signature_unchecked(x, &local))
                .or_default()
                .insert(x.to_vec());
            true
        });
        Ok(out)
    }

    /// `Cell(ē)`: the distinct-entry tuples whose signature is `ē`.
    pub fn cell(&self, e: &CellSignature) -> Result<BTreeSet<Tuple>> {
        Ok(self.cells(e.t())?.remove(e).unwrap_or_default())
    }

    /// Largest gap `|ν^j(h^j_e) - ν^j(h^j_e')|` over levels and colour
    /// pairs, with `ν^j(h^j_e) = j! |H^j_e| / N^j`.
    pub fn equitability_delta(&self) -> Rational {
        let n = self.ground();
        let mut worst = Ratio::from_integer(0u128);
        for j in 1..=self.levels().min(n) {
            let mut counts = vec![0u128; self.resolution as usize];
            for (p, &m) in self.index.masks().iter().enumerate() {
                if m.count_ones() as usize == j {
                    counts[self.colors[p] as usize - 1] += 1;
                }
            }
            let hi = *counts.iter().max().unwrap();
            let lo = *counts.iter().min().unwrap();
            let gap = Ratio::new((hi - lo) * factorial(j), (n as u128).pow(j as u32));
            worst = worst.max(gap);
        }
        worst
    }
}

/// Colours each subset `S` by `interval_of(y_S, l)`.
pub fn hyperpartition_from_seed(seed: &SeedTuple, l: u32) -> Result<Hyperpartition> {
    let colors = seed.colors(l)?;
    Hyperpartition::from_colors(Arc::new(seed.index().clone()), l, colors)
}

/// Decodes the family whose edges under `(i, p)` are the union of
/// `Cell(ē)` over the signatures `ē` selected by `F` for that key.
pub fn step_structure(h: &Hyperpartition, f: &StepLimit) -> Result<Structure> {
    if h.resolution() != f.resolution() {
        return Err(Error::domain(format!(
            "hyperpartition resolution {} differs from limit resolution {}",
            h.resolution(),
            f.resolution()
        )));
    }
    let r_max = f.signature().r_max();
    if h.levels() < r_max {
        return Err(Error::domain(format!(
            "hyperpartition has {} levels, limit needs {r_max}",
            h.levels()
        )));
    }
    let mut by_width: BTreeMap<usize, BTreeMap<CellSignature, BTreeSet<Tuple>>> = BTreeMap::new();
    let mut edges: BTreeMap<IndexKey, BTreeSet<Tuple>> = BTreeMap::new();
    for (key, selected) in f.selected() {
        let u = key.width();
        if let std::collections::btree_map::Entry::Vacant(v) = by_width.entry(u) {
            v.insert(h.cells(u)?);
        }
        let cells = &by_width[&u];
        let union: BTreeSet<Tuple> = selected
            .iter()
            .filter_map(|e| cells.get(e))
            .flatten()
            .cloned()
            .collect();
        edges.insert(key.clone(), union);
    }
    Ok(decode(&DHypFamily::new(
        f.signature().clone(),
        h.ground(),
        edges,
    )?))
}
