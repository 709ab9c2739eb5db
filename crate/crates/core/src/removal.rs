//! The coded edit distance, forbidden-family testing and a greedy repair
//! harness for empirical removal experiments.

use std::collections::BTreeMap;
use std::io::Write;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;

use crate::coding::{encode, induced_partition, IndexKey};
use crate::combin::{self, binomial};
use crate::error::{Error, Result};
use crate::rational::{to_f64, Rational};
use crate::seed::SeedStream;
use crate::structures::{induced_copies, induced_sorted, isomorphic_unchecked, Structure, Tuple};

/// `d(M, N) = Σ_{(i,p)} |DHyp^i_p(M) Δ DHyp^i_p(N)| / m^{‖p‖}` for two
/// structures on the same universe `[m]`.
pub fn distance_d(m: &Structure, n: &Structure) -> Result<Rational> {
    Ok(edit_counts(m, n)?
        .into_iter()
        .map(|(key, count)| Ratio::new(count as u128, (m.size() as u128).pow(key.width() as u32)))
        .sum())
}

/// Size of the symmetric difference under every key where it is nonzero.
pub fn edit_counts(m: &Structure, n: &Structure) -> Result<BTreeMap<IndexKey, usize>> {
    if m.signature() != n.signature() {
        return Err(Error::SignatureMismatch);
    }
    if m.size() != n.size() {
        return Err(Error::domain(format!(
            "distance needs equal universes, got [{}] and [{}]",
            m.size(),
            n.size()
        )));
    }
    let (a, b) = (encode(m), encode(n));
    Ok(a.iter_all()
        .filter_map(|(key, ea)| {
            let count = ea.symmetric_difference(b.edges(&key)).count();
            (count > 0).then_some((key, count))
        })
        .collect())
}

/// Number of `‖m‖`-subsets `A` of `[‖n‖]` with `n|_A ≃ m`.
pub fn count_induced_copies(m: &Structure, n: &Structure) -> Result<u128> {
    if m.signature() != n.signature() {
        return Err(Error::SignatureMismatch);
    }
    Ok(induced_copies(m, n))
}

/// A finite list of pairwise non-isomorphic forbidden structures. An
/// infinite family is represented by its members up to the cap in use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenFamily {
    members: Vec<Structure>,
}

impl ForbiddenFamily {
    pub fn new(members: Vec<Structure>) -> Result<Self> {
        for (i, a) in members.iter().enumerate() {
            if a.signature() != members[0].signature() {
                return Err(Error::SignatureMismatch);
            }
            if members[..i].iter().any(|b| isomorphic_unchecked(a, b)) {
                return Err(Error::domain(format!(
                    "forbidden member {} repeats an earlier isomorphism type",
                    i + 1
                )));
            }
        }
        Ok(ForbiddenFamily { members })
    }

    pub fn empty() -> Self {
        ForbiddenFamily {
            members: Vec::new(),
        }
    }

    pub fn members(&self) -> &[Structure] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn within<'a>(&'a self, n: &'a Structure, cap: usize) -> Result<Vec<&'a Structure>> {
        if let Some(m) = self.members.first() {
            if m.signature() != n.signature() {
                return Err(Error::SignatureMismatch);
            }
        }
        Ok(self
            .members
            .iter()
            .filter(|m| m.size() <= cap && m.size() <= n.size())
            .collect())
    }
}

/// No member of size at most `cap` occurs as an induced substructure.
pub fn is_family_free(n: &Structure, family: &ForbiddenFamily, cap: usize) -> Result<bool> {
    Ok(family
        .within(n, cap)?
        .into_iter()
        .all(|m| induced_copies(m, n) == 0))
}

/// First induced copy in member order, scanning subsets colexicographically.
fn first_copy(n: &Structure, members: &[&Structure]) -> Option<Vec<usize>> {
    members.iter().find_map(|m| {
        let mut found = None;
        combin::for_each_subset_colex(n.size(), m.size(), |a| {
            if isomorphic_unchecked(m, &induced_sorted(n, a)) {
                found = Some(a.to_vec());
                false
            } else {
                true
            }
        });
        found
    })
}

/// Copies of any member whose subset contains every element of `core`.
/// Toggling a tuple on `core` can only change these.
fn copies_through(n: &Structure, members: &[&Structure], core: &[usize]) -> usize {
    let rest: Vec<usize> = (1..=n.size()).filter(|v| !core.contains(v)).collect();
    let mut total = 0;
    let mut buf = Vec::new();
    for m in members {
        if m.size() < core.len() {
            continue;
        }
        combin::for_each_subset_colex(rest.len(), m.size() - core.len(), |extra| {
            buf.clear();
            buf.extend_from_slice(core);
            buf.extend(extra.iter().map(|&j| rest[j - 1]));
            buf.sort_unstable();
            if isomorphic_unchecked(m, &induced_sorted(n, &buf)) {
                total += 1;
            }
            true
        });
    }
    total
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Toggle {
    key: IndexKey,
    coded: Tuple,
    symbol: usize,
    tuple: Tuple,
}

fn toggles_inside(n: &Structure, subset: &[usize], present: bool) -> Vec<Toggle> {
    let mut out = Vec::new();
    for i in 0..n.signature().len() {
        combin::for_each_tuple(subset.len(), n.signature().arity(i), |pos| {
            let tuple: Tuple = pos.iter().map(|&p| subset[p - 1]).collect();
            if n.contains(i, &tuple) == present {
                let key = IndexKey {
                    symbol: i,
                    partition: induced_partition(&tuple).expect("positive arity"),
                };
                let coded = crate::coding::dedup(&tuple).expect("positive arity");
                out.push(Toggle {
                    key,
                    coded,
                    symbol: i,
                    tuple,
                });
            }
            true
        });
    }
    out.sort();
    out
}

/// Outcome of a repair run.
#[derive(Clone, Debug, PartialEq)]
pub struct RemovalReport {
    /// Distance budget the run is judged against, when one was given.
    pub epsilon: Option<f64>,
    pub distance: Rational,
    pub iterations: usize,
    pub success: bool,
    /// Net changed coded edges per key; `distance` is their normalized sum.
    pub edits: BTreeMap<IndexKey, usize>,
}

impl RemovalReport {
    pub fn within_budget(&self) -> Option<bool> {
        self.epsilon
            .map(|eps| self.success && to_f64(self.distance) < eps)
    }
}

/// Greedy witness search for a nearby family-free structure.
///
/// Each iteration takes the first induced copy (member order, then
/// colexicographic subset order) and toggles one tuple whose entries lie in
/// it. Deletions are used whenever the copy has any tuple to delete;
/// otherwise an insertion. Among the candidates the toggle with the largest
/// net drop in the number of induced copies wins, ties going to the least
/// index key and then the least coded tuple. Deterministic.
pub fn greedy_removal(
    n: &Structure,
    family: &ForbiddenFamily,
    cap: usize,
    budget: usize,
) -> Result<(Structure, RemovalReport)> {
    if budget == 0 {
        return Err(Error::domain("iteration budget must be at least 1"));
    }
    let members = family.within(n, cap)?;
    let mut cur = n.clone();
    let mut iterations = 0;
    let success = loop {
        let Some(copy) = first_copy(&cur, &members) else {
            break true;
        };
        if iterations == budget {
            break false;
        }
        let mut candidates = toggles_inside(&cur, &copy, true);
        if candidates.is_empty() {
            candidates = toggles_inside(&cur, &copy, false);
        }
        let mut best: Option<(i64, Toggle)> = None;
        for cand in candidates {
            let mut core = cand.coded.clone();
            core.sort_unstable();
            let before = copies_through(&cur, &members, &core) as i64;
            cur.toggle(cand.symbol, &cand.tuple)?;
            let change = copies_through(&cur, &members, &core) as i64 - before;
            cur.toggle(cand.symbol, &cand.tuple)?;
            if best.as_ref().is_none_or(|(score, _)| change < *score) {
                best = Some((change, cand));
            }
        }
        let (_, chosen) = best.expect("a copy always has some tuple to toggle");
        cur.toggle(chosen.symbol, &chosen.tuple)?;
        iterations += 1;
    };
    let edits = edit_counts(n, &cur)?;
    let distance = distance_d(n, &cur)?;
    Ok((
        cur,
        RemovalReport {
            epsilon: None,
            distance,
            iterations,
            success,
            edits,
        },
    ))
}

/// Largest number of subsets [`estimate_density`] counts exactly.
pub const EXACT_SUBSET_LIMIT: u128 = 1_000_000;
/// Subsets drawn by [`estimate_density`] beyond that.
pub const DENSITY_SAMPLES: u64 = 100_000;

/// `p(m, n)` exactly when `C(‖n‖, ‖m‖)` is at most [`EXACT_SUBSET_LIMIT`],
/// otherwise the fraction of [`DENSITY_SAMPLES`] random subsets inducing `m`.
pub fn estimate_density(m: &Structure, n: &Structure, stream: &SeedStream) -> Result<Rational> {
    if m.signature() != n.signature() {
        return Err(Error::SignatureMismatch);
    }
    if m.size() > n.size() {
        return Ok(Ratio::from_integer(0));
    }
    let total = binomial(n.size(), m.size());
    if total <= EXACT_SUBSET_LIMIT {
        return Ok(Ratio::new(induced_copies(m, n), total));
    }
    let mut rng = stream.rng();
    let mut hits = 0u128;
    for _ in 0..DENSITY_SAMPLES {
        let mut a = rand::seq::index::sample(&mut rng, n.size(), m.size()).into_vec();
        a.iter_mut().for_each(|v| *v += 1);
        a.sort_unstable();
        if isomorphic_unchecked(m, &induced_sorted(n, &a)) {
            hits += 1;
        }
    }
    Ok(Ratio::new(hits, DENSITY_SAMPLES as u128))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub epsilon: f64,
    pub cap: usize,
    pub trials: usize,
    pub budget: usize,
}

/// One trial of [`removal_experiment`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub trial: usize,
    pub size: usize,
    /// Largest (estimated) density of a member of size at most the cap.
    pub max_density: Rational,
    /// Repair succeeded and landed strictly within `epsilon`.
    pub repaired: bool,
    pub distance: Rational,
    pub iterations: usize,
}

/// Runs the generator `trials` times (trial `i` gets `stream.split(i)`),
/// measures the largest forbidden density and repairs greedily.
pub fn removal_experiment<G>(
    family: &ForbiddenFamily,
    config: &ExperimentConfig,
    generator: G,
    stream: &SeedStream,
) -> Result<Vec<ExperimentRow>>
where
    G: Fn(usize, &SeedStream) -> Result<Structure> + Sync,
{
    if !(config.epsilon > 0.0) {
        return Err(Error::domain("epsilon must be positive"));
    }
    (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let trial_stream = stream.split(trial as u64);
            let n = generator(trial, &trial_stream.split(0))?;
            let mut max_density = Ratio::from_integer(0);
            for m in family.within(&n, config.cap)? {
                max_density = max_density.max(estimate_density(m, &n, &trial_stream.split(1))?);
            }
            let (_, mut report) = greedy_removal(&n, family, config.cap, config.budget)?;
            report.epsilon = Some(config.epsilon);
            Ok(ExperimentRow {
                trial,
                size: n.size(),
                max_density,
                repaired: report.within_budget() == Some(true),
                distance: report.distance,
                iterations: report.iterations,
            })
        })
        .collect()
}

/// Column order of [`write_rows_csv`].
pub const CSV_HEADER: [&str; 8] = [
    "trial",
    "size",
    "max_density_num",
    "max_density_den",
    "repaired",
    "d_num",
    "d_den",
    "iterations",
];

pub fn write_rows_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Resource(format!("writing CSV: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.size.to_string(),
            r.max_density.numer().to_string(),
            r.max_density.denom().to_string(),
            r.repaired.to_string(),
            r.distance.numer().to_string(),
            r.distance.denom().to_string(),
            r.iterations.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Resource(format!("writing CSV: {e}")))
}

/// Repair success rate among trials whose forbidden density is at most
/// each observed threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    pub threshold: Rational,
    pub trials: usize,
    pub success_rate: f64,
}

pub fn frontier(rows: &[ExperimentRow]) -> Vec<FrontierPoint> {
    let mut thresholds: Vec<Rational> = rows.iter().map(|r| r.max_density).collect();
    thresholds.sort();
    thresholds.dedup();
    thresholds
        .into_iter()
        .map(|threshold| {
            let below: Vec<_> = rows.iter().filter(|r| r.max_density <= threshold).collect();
            let ok = below.iter().filter(|r| r.repaired).count();
            FrontierPoint {
                threshold,
                trials: below.len(),
                success_rate: ok as f64 / below.len() as f64,
            }
        })
        .collect()
}

/// Toggles `k` distinct tuples of arity at least 2 with pairwise distinct
/// entries, chosen uniformly; returns the toggled `(symbol, tuple)` pairs.
pub fn plant_toggles(
    n: &mut Structure,
    k: usize,
    stream: &SeedStream,
) -> Result<Vec<(usize, Tuple)>> {
    let sig = n.signature().clone();
    let symbols: Vec<usize> = (0..sig.len())
        .filter(|&i| sig.arity(i) <= n.size())
        .collect();
    if symbols.is_empty() {
        return Err(Error::domain("no symbol admits a distinct-entry tuple"));
    }
    let mut rng = stream.rng();
    let mut done: Vec<(usize, Tuple)> = Vec::with_capacity(k);
    let capacity: u128 = symbols
        .iter()
        .map(|&i| crate::combin::falling(n.size(), sig.arity(i)))
        .sum();
    if k as u128 > capacity {
        return Err(Error::domain(format!("cannot plant {k} distinct toggles")));
    }
    while done.len() < k {
        let i = symbols[rng.gen_range(0..symbols.len())];
        let mut t = rand::seq::index::sample(&mut rng, n.size(), sig.arity(i)).into_vec();
        t.iter_mut().for_each(|v| *v += 1);
        if done.iter().any(|(j, u)| *j == i && *u == t) {
            continue;
        }
        n.toggle(i, &t)?;
        done.push((i, t));
    }
    Ok(done)
}
