//! Finite relational structures and their step limits.
//!
//! * [`structures`]: signatures, structures, embeddings, isomorphism and the
//!   densities `p`, `t`, `t₀`, `t_ind`.
//! * [`coding`]: the partition-indexed directed hypergraph coding.
//! * [`seed`] and [`limit`]: seed tuples, step limits, the sampler
//!   `N(F, m, ȳ)` and exact density oracles for it.
//! * [`hyperpartition`]: colourings of small subsets, cells and equitability.
//! * [`removal`]: the coded edit distance and a greedy repair harness.
//!
//! All probabilities are exact rationals; floating point appears only in
//! seed values and Monte Carlo summaries.

pub mod coding;
mod combin;
pub mod error;
pub mod hyperpartition;
pub mod limit;
pub mod rational;
pub mod removal;
pub mod seed;
pub mod structures;

pub use coding::{decode, encode, partitions_of, DHypFamily, IndexKey, SetPartition};
pub use error::{Error, Result};
pub use hyperpartition::{hyperpartition_from_seed, step_structure, Hyperpartition};
pub use limit::{
    embedding_measure, induced_density, realize, sample_structure, CellSignature, StepLimit,
};
pub use rational::{Density, Rational};
pub use removal::{distance_d, greedy_removal, ForbiddenFamily, RemovalReport};
pub use seed::{interval_of, sample_seed, SeedStream, SeedTuple, SubsetIndex};
pub use structures::{Signature, Structure, Tuple};
