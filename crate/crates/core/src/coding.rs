//! Coding of relations by families of uniform directed hypergraphs.
//!
//! A tuple `x̄` of a `t`-ary relation is filed under its kernel partition
//! `p(x̄)` of `[t]` (positions holding equal entries share a class), and
//! stored as the duplicate-free tuple `C(x̄)` of first occurrences. The
//! resulting edge sets, one per `(symbol, partition)` index, determine the
//! structure and can be decoded back to it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::structures::{Signature, Structure, Tuple};

/// A partition of `[t]`, stored as its restricted-growth string: entry `j`
/// is the (0-based) class of element `j + 1`, and classes are numbered in
/// order of their least element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetPartition {
    rgs: Vec<usize>,
}

impl SetPartition {
    /// Validates that `rgs` is a restricted-growth string.
    pub fn from_rgs(rgs: Vec<usize>) -> Result<Self> {
        if rgs.is_empty() {
            return Err(Error::domain("partition of the empty set"));
        }
        let mut next = 0;
        for &c in &rgs {
            if c > next {
                return Err(Error::domain(format!(
                    "{rgs:?} is not a restricted-growth string"
                )));
            }
            if c == next {
                next += 1;
            }
        }
        Ok(SetPartition { rgs })
    }

    /// Builds a partition from explicit classes of 1-based elements.
    pub fn from_classes(classes: &[Vec<usize>]) -> Result<Self> {
        let t: usize = classes.iter().map(Vec::len).sum();
        let mut owner = vec![usize::MAX; t];
        for (c, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::domain("empty partition class"));
            }
            for &x in class {
                if x == 0 || x > t || owner[x - 1] != usize::MAX {
                    return Err(Error::domain(format!(
                        "classes {classes:?} do not partition [{t}]"
                    )));
                }
                owner[x - 1] = c;
            }
        }
        // Renumber classes by least element.
        let mut relabel = vec![usize::MAX; classes.len()];
        let mut next = 0;
        let rgs = owner
            .into_iter()
            .map(|c| {
                if relabel[c] == usize::MAX {
                    relabel[c] = next;
                    next += 1;
                }
                relabel[c]
            })
            .collect();
        SetPartition::from_rgs(rgs)
    }

    pub fn rgs(&self) -> &[usize] {
        &self.rgs
    }

    /// Size of the partitioned set.
    pub fn t(&self) -> usize {
        self.rgs.len()
    }

    /// Number of classes, `‖p‖`.
    pub fn num_classes(&self) -> usize {
        self.rgs.iter().max().map_or(0, |m| m + 1)
    }

    /// Classes `C_1, C_2, ...` (1-based elements), ordered by least element.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes()];
        for (j, &c) in self.rgs.iter().enumerate() {
            out[c].push(j + 1);
        }
        out
    }

    /// Expands a `‖p‖`-tuple back to a `t`-tuple: position `j` receives the
    /// entry of the class containing `j`.
    pub fn expand(&self, edge: &[usize]) -> Tuple {
        self.rgs.iter().map(|&c| edge[c]).collect()
    }
}

/// Classes joined by `|`, elements by `,`: `1,2|3`.
impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes = self.classes();
        for (i, class) in classes.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, x) in class.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let classes = s
            .split('|')
            .map(|class| {
                class
                    .split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::format(format!("bad partition {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        SetPartition::from_classes(&classes).map_err(|e| Error::format(e.to_string()))
    }
}

/// All partitions of `[t]`, in lexicographic order of restricted-growth
/// strings.
pub fn partitions_of(t: usize) -> Result<Vec<SetPartition>> {
    if t == 0 {
        return Err(Error::domain(
            "partitions of [0] requested; t must be positive",
        ));
    }
    fn rec(t: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<SetPartition>) {
        if cur.len() == t {
            out.push(SetPartition { rgs: cur.clone() });
            return;
        }
        let next = if cur.is_empty() { 0 } else { max + 1 };
        for c in 0..=next {
            cur.push(c);
            rec(t, cur, max.max(c), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(t, &mut Vec::with_capacity(t), 0, &mut out);
    Ok(out)
}

/// The kernel partition of a tuple: `j` and `j'` share a class iff
/// `x_j = x_j'`.
pub fn induced_partition(x: &[usize]) -> Result<SetPartition> {
    if x.is_empty() {
        return Err(Error::domain("kernel partition of an empty tuple"));
    }
    Ok(kernel(x))
}

fn kernel(x: &[usize]) -> SetPartition {
    let mut firsts: Vec<usize> = Vec::new();
    let rgs = x
        .iter()
        .map(|v| match firsts.iter().position(|f| f == v) {
            Some(c) => c,
            None => {
                firsts.push(*v);
                firsts.len() - 1
            }
        })
        .collect();
    SetPartition { rgs }
}

/// `C(x̄)`: first occurrences of each entry, in order.
pub fn dedup(x: &[usize]) -> Result<Tuple> {
    if x.is_empty() {
        return Err(Error::domain("dedup of an empty tuple"));
    }
    Ok(first_occurrences(x))
}

fn first_occurrences(x: &[usize]) -> Tuple {
    let mut out: Tuple = Vec::with_capacity(x.len());
    for &v in x {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// A `(symbol, partition)` index; the partition is of `[arity(symbol)]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexKey {
    pub symbol: usize,
    pub partition: SetPartition,
}

impl IndexKey {
    pub fn new(sig: &Signature, symbol: usize, partition: SetPartition) -> Result<Self> {
        if symbol >= sig.len() {
            return Err(Error::domain(format!("no symbol with index {symbol}")));
        }
        if partition.t() != sig.arity(symbol) {
            return Err(Error::domain(format!(
                "partition {partition} does not match arity {} of {}",
                sig.arity(symbol),
                sig.name(symbol)
            )));
        }
        Ok(IndexKey { symbol, partition })
    }

    /// `‖p‖`, the uniformity of the hypergraph stored under this key.
    pub fn width(&self) -> usize {
        self.partition.num_classes()
    }
}

/// All index keys of a signature, by symbol and then partition order.
pub fn index_keys(sig: &Signature) -> Vec<IndexKey> {
    (0..sig.len())
        .flat_map(|i| {
            partitions_of(sig.arity(i))
                .expect("arities are positive")
                .into_iter()
                .map(move |partition| IndexKey {
                    symbol: i,
                    partition,
                })
        })
        .collect()
}

/// The coded form of a structure: one set of distinct-entry tuples per
/// index key. Keys with no edges are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DHypFamily {
    sig: Signature,
    size: usize,
    edges: BTreeMap<IndexKey, BTreeSet<Tuple>>,
}

impl DHypFamily {
    /// Checks each key against the signature and each edge for length,
    /// range and distinct entries.
    pub fn new(
        sig: Signature,
        size: usize,
        edges: BTreeMap<IndexKey, BTreeSet<Tuple>>,
    ) -> Result<Self> {
        for (key, set) in &edges {
            if key.symbol >= sig.len() || key.partition.t() != sig.arity(key.symbol) {
                return Err(Error::format(format!(
                    "index ({}, {}) does not fit the signature",
                    key.symbol, key.partition
                )));
            }
            for e in set {
                if e.len() != key.width() {
                    return Err(Error::format(format!(
                        "edge {e:?} under {} has wrong length",
                        key.partition
                    )));
                }
                if e.iter().any(|&v| v == 0 || v > size) {
                    return Err(Error::format(format!("edge {e:?} outside [{size}]")));
                }
                if first_occurrences(e).len() != e.len() {
                    return Err(Error::format(format!("edge {e:?} repeats an entry")));
                }
            }
        }
        let edges = edges.into_iter().filter(|(_, s)| !s.is_empty()).collect();
        Ok(DHypFamily { sig, size, edges })
    }

    pub fn empty(sig: Signature, size: usize) -> Self {
        DHypFamily {
            sig,
            size,
            edges: BTreeMap::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Edges under `key`; empty when the key holds none.
    pub fn edges(&self, key: &IndexKey) -> &BTreeSet<Tuple> {
        static EMPTY: BTreeSet<Tuple> = BTreeSet::new();
        self.edges.get(key).unwrap_or(&EMPTY)
    }

    /// Every index key of the signature with its (possibly empty) edge set.
    pub fn iter_all(&self) -> impl Iterator<Item = (IndexKey, &BTreeSet<Tuple>)> + '_ {
        index_keys(&self.sig).into_iter().map(move |k| {
            let e = self.edges(&k);
            (k, e)
        })
    }

    /// Only the keys holding at least one edge.
    pub fn nonempty(&self) -> impl Iterator<Item = (&IndexKey, &BTreeSet<Tuple>)> + '_ {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().map(BTreeSet::len).sum()
    }
}

pub fn encode(n: &Structure) -> DHypFamily {
    let mut edges: BTreeMap<IndexKey, BTreeSet<Tuple>> = BTreeMap::new();
    for (i, t) in n.tuples() {
        let key = IndexKey {
            symbol: i,
            partition: kernel(t),
        };
        edges.entry(key).or_default().insert(first_occurrences(t));
    }
    DHypFamily {
        sig: n.signature().clone(),
        size: n.size(),
        edges,
    }
}

pub fn decode(d: &DHypFamily) -> Structure {
    let mut relations = vec![BTreeSet::new(); d.sig.len()];
    for (key, set) in &d.edges {
        for e in set {
            relations[key.symbol].insert(key.partition.expand(e));
        }
    }
    Structure::new(d.sig.clone(), d.size, relations).expect("family invariants hold")
}
