//! Memetic multilevel k-way hypergraph partitioning.
//!
//! The crate is layered bottom-up:
//!
//! * [`hypergraph`]: weighted hypergraph with reversible single-pair contraction.
//! * [`io`]: hMetis `.hgr` and flat partition files.
//! * [`metrics`]: partitions with incremental pin counts, the connectivity and
//!   cut objectives, the balance bound and the cut-multiset similarity.
//! * [`coarsening`], [`initial`], [`refinement`] and [`multilevel`]: an
//!   n-level multilevel engine (one contraction per level) with constrained
//!   coarsening, a small initial-partitioning portfolio and localized k-way FM.
//! * [`evolution`]: the steady-state memetic loop with two-point and
//!   edge-frequency recombination, V-cycle mutations and similarity-aware
//!   replacement.
//! * [`harness`]: seeded experiment runner, convergence and performance-plot
//!   data, an exhaustive oracle and a synthetic instance generator.

pub mod coarsening;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod hypergraph;
pub mod initial;
pub mod io;
pub mod metrics;
pub mod multilevel;
pub mod refinement;

pub use error::{Error, Result};
pub use hypergraph::{ContractionMemento, Hypergraph, NetId, VertexId, Weight};
pub use metrics::{BlockId, CutMultiset, Partition};

/// Seeded generator used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's generator from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
