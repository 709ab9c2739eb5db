//! Finite relational signatures and structures over `[m] = {1, ..., m}`,
//! together with embeddings, isomorphism and the four density functions.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::combin::{self, binomial, factorial, falling};
use crate::error::{Error, Result};
use crate::rational::Density;

/// A tuple of universe elements, 1-based.
pub type Tuple = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// A finite relational language: an ordered list of named relation symbols.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let symbols: Vec<Symbol> = symbols
            .into_iter()
            .map(|(name, arity)| Symbol {
                name: name.into(),
                arity,
            })
            .collect();
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if s.name.is_empty() || s.name.chars().any(char::is_whitespace) {
                return Err(Error::InvalidSignature(format!(
                    "bad symbol name {:?}",
                    s.name
                )));
            }
            if s.arity == 0 {
                return Err(Error::InvalidSignature(format!(
                    "symbol {} has arity 0",
                    s.name
                )));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::InvalidSignature(format!(
                    "duplicate symbol {}",
                    s.name
                )));
            }
        }
        Ok(Signature { symbols })
    }

    /// One binary symbol `R`.
    pub fn binary() -> Self {
        Signature::new([("R", 2)]).expect("valid signature")
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn arity(&self, symbol: usize) -> usize {
        self.symbols[symbol].arity
    }

    pub fn name(&self, symbol: usize) -> &str {
        &self.symbols[symbol].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    /// Largest arity, or 0 for the empty language.
    pub fn r_max(&self) -> usize {
        self.symbols.iter().map(|s| s.arity).max().unwrap_or(0)
    }
}

/// A finite structure on the universe `[size]`.
///
/// Relations are kept as ordered sets so that equality is literal equality
/// of tuple sets and iteration order is canonical.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Structure {
    sig: Signature,
    size: usize,
    relations: Vec<BTreeSet<Tuple>>,
}

impl Structure {
    pub fn empty(sig: Signature, size: usize) -> Self {
        let relations = vec![BTreeSet::new(); sig.len()];
        Structure {
            sig,
            size,
            relations,
        }
    }

    /// Every tuple of every relation is present.
    pub fn complete(sig: Signature, size: usize) -> Self {
        let mut s = Structure::empty(sig, size);
        for i in 0..s.sig.len() {
            let arity = s.sig.arity(i);
            combin::for_each_tuple(size, arity, |t| {
                s.relations[i].insert(t.to_vec());
                true
            });
        }
        s
    }

    pub fn new(sig: Signature, size: usize, relations: Vec<BTreeSet<Tuple>>) -> Result<Self> {
        if relations.len() != sig.len() {
            return Err(Error::domain(format!(
                "expected {} relations, got {}",
                sig.len(),
                relations.len()
            )));
        }
        for (i, rel) in relations.iter().enumerate() {
            for t in rel {
                check_tuple(&sig, size, i, t)?;
            }
        }
        Ok(Structure {
            sig,
            size,
            relations,
        })
    }

    pub fn from_tuples<I>(sig: Signature, size: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Tuple)>,
    {
        let mut s = Structure::empty(sig, size);
        for (i, t) in tuples {
            s.insert(i, t)?;
        }
        Ok(s)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn relation(&self, symbol: usize) -> &BTreeSet<Tuple> {
        &self.relations[symbol]
    }

    pub fn relations(&self) -> &[BTreeSet<Tuple>] {
        &self.relations
    }

    /// All `(symbol, tuple)` pairs in canonical order.
    pub fn tuples(&self) -> impl Iterator<Item = (usize, &Tuple)> + '_ {
        self.relations
            .iter()
            .enumerate()
            .flat_map(|(i, rel)| rel.iter().map(move |t| (i, t)))
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.iter().map(BTreeSet::len).sum()
    }

    pub fn contains(&self, symbol: usize, tuple: &[usize]) -> bool {
        self.relations
            .get(symbol)
            .is_some_and(|rel| rel.contains(tuple))
    }

    /// Returns whether the tuple was newly inserted.
    pub fn insert(&mut self, symbol: usize, tuple: Tuple) -> Result<bool> {
        check_tuple(&self.sig, self.size, symbol, &tuple)?;
        Ok(self.relations[symbol].insert(tuple))
    }

    pub fn remove(&mut self, symbol: usize, tuple: &[usize]) -> bool {
        self.relations
            .get_mut(symbol)
            .is_some_and(|rel| rel.remove(tuple))
    }

    /// Flips membership of one tuple; returns whether it is present afterwards.
    pub fn toggle(&mut self, symbol: usize, tuple: &[usize]) -> Result<bool> {
        if self.remove(symbol, tuple) {
            Ok(false)
        } else {
            self.insert(symbol, tuple.to_vec())
        }
    }

    /// Image of the structure under the bijection `v -> perm[v - 1]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Structure> {
        check_permutation(perm, self.size)?;
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .map(|t| t.iter().map(|&v| perm[v - 1]).collect())
                    .collect()
            })
            .collect();
        Ok(Structure {
            sig: self.sig.clone(),
            size: self.size,
            relations,
        })
    }

    fn relabel_unchecked(&self, perm: &[usize]) -> Structure {
        let relations = self
            .relations
            .iter()
            .map(|rel| {
                rel.iter()
                    .map(|t| t.iter().map(|&v| perm[v - 1]).collect())
                    .collect()
            })
            .collect();
        Structure {
            sig: self.sig.clone(),
            size: self.size,
            relations,
        }
    }
}

fn check_tuple(sig: &Signature, size: usize, symbol: usize, t: &[usize]) -> Result<()> {
    if symbol >= sig.len() {
        return Err(Error::domain(format!("no symbol with index {symbol}")));
    }
    if t.len() != sig.arity(symbol) {
        return Err(Error::domain(format!(
            "tuple {:?} has length {} but {} has arity {}",
            t,
            t.len(),
            sig.name(symbol),
            sig.arity(symbol)
        )));
    }
    if let Some(&v) = t.iter().find(|&&v| v == 0 || v > size) {
        return Err(Error::domain(format!(
            "entry {v} of {:?} outside universe [{size}]",
            t
        )));
    }
    Ok(())
}

pub(crate) fn check_permutation(perm: &[usize], size: usize) -> Result<()> {
    if perm.len() != size {
        return Err(Error::domain(
            "permutation length differs from universe size",
        ));
    }
    let mut seen = vec![false; size + 1];
    for &v in perm {
        if v == 0 || v > size || seen[v] {
            return Err(Error::domain(format!(
                "{perm:?} is not a permutation of [{size}]"
            )));
        }
        seen[v] = true;
    }
    Ok(())
}

fn same_signature(m: &Structure, n: &Structure) -> Result<()> {
    if m.sig == n.sig {
        Ok(())
    } else {
        Err(Error::SignatureMismatch)
    }
}

/// The substructure induced on `subset`, relabelled to `[|subset|]` by the
/// increasing enumeration of `subset`.
pub fn induced_substructure(n: &Structure, subset: &[usize]) -> Result<Structure> {
    if subset.is_empty() {
        return Err(Error::domain("induced substructure on the empty set"));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("subset has repeated elements"));
    }
    if *sorted.last().unwrap() > n.size || sorted[0] == 0 {
        return Err(Error::domain(format!(
            "subset {subset:?} not contained in [{}]",
            n.size
        )));
    }
    Ok(induced_sorted(n, &sorted))
}

/// `subset` must be sorted, duplicate free and inside the universe.
pub(crate) fn induced_sorted(n: &Structure, subset: &[usize]) -> Structure {
    let mut rank = vec![0usize; n.size + 1];
    for (pos, &v) in subset.iter().enumerate() {
        rank[v] = pos + 1;
    }
    let relations = n
        .relations
        .iter()
        .map(|rel| {
            rel.iter()
                .filter(|t| t.iter().all(|&v| rank[v] != 0))
                .map(|t| t.iter().map(|&v| rank[v]).collect())
                .collect()
        })
        .collect();
    Structure {
        sig: n.sig.clone(),
        size: subset.len(),
        relations,
    }
}

/// Whether `f` (with `f[v - 1]` the image of `v`) is an embedding of `m`
/// into `n`: injective, and every tuple over `[‖m‖]` is related in `m`
/// exactly when its image is related in `n`.
pub fn is_embedding(f: &[usize], m: &Structure, n: &Structure) -> Result<bool> {
    same_signature(m, n)?;
    if f.len() != m.size {
        return Err(Error::domain("map is not total on the source universe"));
    }
    let mut seen = vec![false; n.size + 1];
    for &v in f {
        if v == 0 || v > n.size {
            return Err(Error::domain(format!("image {v} outside [{}]", n.size)));
        }
        if seen[v] {
            return Err(Error::domain("map is not injective"));
        }
        seen[v] = true;
    }
    Ok(embeds(f, m, n))
}

fn embeds(f: &[usize], m: &Structure, n: &Structure) -> bool {
    let mut image = Vec::new();
    for (i, rel) in m.relations.iter().enumerate() {
        // Forward direction first: cheap rejection.
        for t in rel {
            image.clear();
            image.extend(t.iter().map(|&v| f[v - 1]));
            if !n.relations[i].contains(&image) {
                return false;
            }
        }
        let mut ok = true;
        combin::for_each_tuple(m.size, m.sig.arity(i), |t| {
            if rel.contains(t) {
                return true;
            }
            image.clear();
            image.extend(t.iter().map(|&v| f[v - 1]));
            if n.relations[i].contains(&image) {
                ok = false;
            }
            ok
        });
        if !ok {
            return false;
        }
    }
    true
}

fn is_homomorphism(f: &[usize], m: &Structure, n: &Structure) -> bool {
    let mut image = Vec::new();
    m.relations.iter().enumerate().all(|(i, rel)| {
        rel.iter().all(|t| {
            image.clear();
            image.extend(t.iter().map(|&v| f[v - 1]));
            n.relations[i].contains(&image)
        })
    })
}

/// Per-vertex invariant: how often the vertex occurs at each position of
/// each symbol. Isomorphisms preserve it.
fn vertex_profiles(s: &Structure) -> Vec<Vec<usize>> {
    let width: usize = s.sig.symbols().iter().map(|x| x.arity).sum();
    let mut prof = vec![vec![0usize; width]; s.size + 1];
    let mut offset = 0;
    for (i, rel) in s.relations.iter().enumerate() {
        for t in rel {
            for (j, &v) in t.iter().enumerate() {
                prof[v][offset + j] += 1;
            }
        }
        offset += s.sig.arity(i);
    }
    prof
}

/// Backtracking search over bijections `[‖m‖] -> [‖n‖]`, calling `visit` on
/// each isomorphism found until it returns `false`.
fn search_isomorphisms(m: &Structure, n: &Structure, mut visit: impl FnMut(&[usize]) -> bool) {
    if m.size != n.size {
        return;
    }
    if m.relations
        .iter()
        .zip(&n.relations)
        .any(|(a, b)| a.len() != b.len())
    {
        return;
    }
    let pm = vertex_profiles(m);
    let pn = vertex_profiles(n);
    {
        let mut a: Vec<_> = pm[1..].to_vec();
        let mut b: Vec<_> = pn[1..].to_vec();
        a.sort();
        b.sort();
        if a != b {
            return;
        }
    }

    struct Ctx<'a> {
        m: &'a Structure,
        n: &'a Structure,
        pm: Vec<Vec<usize>>,
        pn: Vec<Vec<usize>>,
        map: Vec<usize>,
        used: Vec<bool>,
    }

    // Checks every tuple over {1..=v} that mentions v.
    fn consistent(ctx: &Ctx<'_>, v: usize) -> bool {
        let mut image = Vec::new();
        for i in 0..ctx.m.sig.len() {
            let r = ctx.m.sig.arity(i);
            let mut ok = true;
            combin::for_each_tuple(v, r, |t| {
                if !t.contains(&v) {
                    return true;
                }
                image.clear();
                image.extend(t.iter().map(|&x| ctx.map[x - 1]));
                ok = ctx.m.relations[i].contains(t) == ctx.n.relations[i].contains(&image);
                ok
            });
            if !ok {
                return false;
            }
        }
        true
    }

    fn rec(ctx: &mut Ctx<'_>, v: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if v > ctx.m.size {
            return visit(&ctx.map);
        }
        for w in 1..=ctx.n.size {
            if ctx.used[w] || ctx.pm[v] != ctx.pn[w] {
                continue;
            }
            ctx.map.push(w);
            ctx.used[w] = true;
            let go = !consistent(ctx, v) || rec(ctx, v + 1, visit);
            ctx.used[w] = false;
            ctx.map.pop();
            if !go {
                return false;
            }
        }
        true
    }

    let mut ctx = Ctx {
        m,
        n,
        pm,
        pn,
        map: Vec::with_capacity(m.size),
        used: vec![false; n.size + 1],
    };
    rec(&mut ctx, 1, &mut visit);
}

/// Some isomorphism `m -> n`, if one exists.
pub fn find_isomorphism(m: &Structure, n: &Structure) -> Result<Option<Vec<usize>>> {
    same_signature(m, n)?;
    let mut found = None;
    search_isomorphisms(m, n, |f| {
        found = Some(f.to_vec());
        false
    });
    Ok(found)
}

pub fn is_isomorphic(m: &Structure, n: &Structure) -> Result<bool> {
    Ok(find_isomorphism(m, n)?.is_some())
}

pub(crate) fn isomorphic_unchecked(m: &Structure, n: &Structure) -> bool {
    let mut found = false;
    search_isomorphisms(m, n, |_| {
        found = true;
        false
    });
    found
}

/// `|Aut(m)|`.
pub fn automorphism_count(m: &Structure) -> u128 {
    let mut count = 0u128;
    search_isomorphisms(m, m, |_| {
        count += 1;
        true
    });
    count
}

/// Number of `‖m‖`-subsets `A` of `[‖n‖]` with `n|_A ≃ m`.
pub(crate) fn induced_copies(m: &Structure, n: &Structure) -> u128 {
    if m.size > n.size {
        return 0;
    }
    let mut count = 0u128;
    combin::for_each_subset_colex(n.size, m.size, |a| {
        if isomorphic_unchecked(m, &induced_sorted(n, a)) {
            count += 1;
        }
        true
    });
    count
}

/// Induced substructure density `p(m, n)`.
pub fn density_p(m: &Structure, n: &Structure) -> Result<Density> {
    same_signature(m, n)?;
    if n.size < m.size {
        return Ok(Density::ZERO);
    }
    Ok(Density::fraction(
        induced_copies(m, n),
        binomial(n.size, m.size),
    ))
}

/// Homomorphism density `t(m, n)` over all `‖n‖^‖m‖` maps. With `n` empty
/// and `m` nonempty there are no maps and the value is 0.
pub fn density_t(m: &Structure, n: &Structure) -> Result<Density> {
    same_signature(m, n)?;
    let total = (n.size as u128).pow(m.size as u32);
    let mut hits = 0u128;
    combin::for_each_tuple(n.size, m.size, |f| {
        if is_homomorphism(f, m, n) {
            hits += 1;
        }
        true
    });
    Ok(Density::fraction(hits, total))
}

/// Injective homomorphism density `t₀(m, n)`.
pub fn density_t0(m: &Structure, n: &Structure) -> Result<Density> {
    same_signature(m, n)?;
    if n.size < m.size {
        return Ok(Density::ZERO);
    }
    let mut hits = 0u128;
    combin::for_each_injection(n.size, m.size, |f| {
        if is_homomorphism(f, m, n) {
            hits += 1;
        }
        true
    });
    Ok(Density::fraction(hits, falling(n.size, m.size)))
}

/// Embedding density `t_ind(m, n)`.
pub fn density_tind(m: &Structure, n: &Structure) -> Result<Density> {
    same_signature(m, n)?;
    if n.size < m.size {
        return Ok(Density::ZERO);
    }
    let mut hits = 0u128;
    combin::for_each_injection(n.size, m.size, |f| {
        if embeds(f, m, n) {
            hits += 1;
        }
        true
    });
    Ok(Density::fraction(hits, falling(n.size, m.size)))
}

/// Probability that a uniformly random permutation of `[‖m‖]` is an
/// automorphism, `|Aut(m)| / ‖m‖!`.
pub fn automorphism_probability(m: &Structure) -> Density {
    Density::fraction(automorphism_count(m), factorial(m.size))
}

/// Upper bound on the number of permutations [`canonical_form`] will try.
pub const CANONICAL_MAX_SIZE: usize = 8;

/// The least relabelling of `s` over all permutations of its universe.
/// Two structures are isomorphic iff their canonical forms are equal.
pub fn canonical_form(s: &Structure) -> Result<Structure> {
    if s.size > CANONICAL_MAX_SIZE {
        return Err(Error::Resource(format!(
            "canonical form limited to universes of size {CANONICAL_MAX_SIZE}"
        )));
    }
    Ok(canonical_unchecked(s))
}

fn canonical_unchecked(s: &Structure) -> Structure {
    (1..=s.size)
        .permutations(s.size)
        .map(|p| s.relabel_unchecked(&p))
        .min()
        .unwrap_or_else(|| s.clone())
}

/// Largest number of tuple slots (`Σ k^{r_i}`) [`isomorphism_types`] will
/// enumerate exhaustively.
pub const TYPE_ENUMERATION_MAX_SLOTS: usize = 20;

/// One canonical representative per isomorphism class of structures of size
/// `k`, in increasing canonical order.
pub fn isomorphism_types(sig: &Signature, k: usize) -> Result<Vec<Structure>> {
    let mut slots: Vec<(usize, Tuple)> = Vec::new();
    for i in 0..sig.len() {
        combin::for_each_tuple(k, sig.arity(i), |t| {
            slots.push((i, t.to_vec()));
            true
        });
    }
    if slots.len() > TYPE_ENUMERATION_MAX_SLOTS || k > CANONICAL_MAX_SIZE {
        return Err(Error::Resource(format!(
            "{} tuple slots on [{k}] is too many to enumerate",
            slots.len()
        )));
    }
    let mut types = BTreeSet::new();
    for mask in 0u64..(1u64 << slots.len()) {
        let mut s = Structure::empty(sig.clone(), k);
        for (bit, (i, t)) in slots.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                s.relations[*i].insert(t.clone());
            }
        }
        types.insert(canonical_unchecked(&s));
    }
    Ok(types.into_iter().collect())
}

/// Counts, for every isomorphism type of size `k`, the `k`-subsets of
/// `[‖n‖]` inducing it. Keys are canonical forms.
pub fn induced_type_counts(n: &Structure, k: usize) -> Result<BTreeMap<Structure, u128>> {
    if k > CANONICAL_MAX_SIZE {
        return Err(Error::Resource(format!(
            "canonical form limited to universes of size {CANONICAL_MAX_SIZE}"
        )));
    }
    let mut counts = BTreeMap::new();
    combin::for_each_subset_colex(n.size, k, |a| {
        *counts
            .entry(canonical_unchecked(&induced_sorted(n, a)))
            .or_insert(0) += 1;
        true
    });
    Ok(counts)
}
