//! Deterministic fixtures shared by the benchmarks.

use structlim::structures::Tuple;
use structlim::{sample_structure, SeedStream, Signature, StepLimit, Structure};

/// A structure on `[n]` drawn from the half-density graph limit.
pub fn half_density_graph(n: usize, seed: u64) -> Structure {
    sample_structure(&StepLimit::half_density_graph(), n, &SeedStream::new(seed))
        .expect("n is positive")
}

/// The directed cycle `1 -> 2 -> ... -> k -> 1`.
pub fn directed_cycle(k: usize) -> Structure {
    let tuples = (1..=k).map(|v| (0, vec![v, v % k + 1]));
    Structure::from_tuples(Signature::binary(), k, tuples).expect("valid cycle")
}

/// A binary and a ternary symbol; the ternary relation holds for every
/// tuple whose entries sum to a multiple of three.
pub fn mixed_structure(n: usize) -> Structure {
    let sig = Signature::new([("E", 2), ("T", 3)]).expect("valid signature");
    let mut tuples: Vec<(usize, Tuple)> = Vec::new();
    for a in 1..=n {
        for b in 1..=n {
            if (a * b) % 2 == 1 || a == b {
                tuples.push((0, vec![a, b]));
            }
            for c in 1..=n {
                if (a + b + c) % 3 == 0 {
                    tuples.push((1, vec![a, b, c]));
                }
            }
        }
    }
    Structure::from_tuples(sig, n, tuples).expect("entries within range")
}

/// Every cell selected for the ternary key of `{E/2, T/3}` at resolution `l`.
pub fn mixed_limit(l: u32) -> StepLimit {
    let sig = Signature::new([("E", 2), ("T", 3)]).expect("valid signature");
    StepLimit::from_rule(sig, l, |key, cell| {
        key.width() == 3 || cell.colors().iter().sum::<u32>() % 2 == 0
    })
    .expect("positive resolution")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_well_formed() {
        assert_eq!(directed_cycle(4).tuple_count(), 4);
        assert_eq!(half_density_graph(8, 1), half_density_graph(8, 1));
        assert_eq!(mixed_structure(3).size(), 3);
        assert_eq!(mixed_limit(2).resolution(), 2);
    }
}
