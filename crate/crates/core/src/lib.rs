//! Classical toolkit for studying how penalty weights, chain strength and
//! auto-scaling shape annealer results on the traveling salesman problem.
//!
//! The pipeline mirrors what an annealer user does:
//!
//! 1. load a TSPLIB instance ([`instance`]),
//! 2. build the reference or median-pruned heuristic QUBO and convert it to an
//!    Ising model ([`qubo`]),
//! 3. minor-embed it onto a Chimera graph with ferromagnetic chains
//!    ([`embedding`]),
//! 4. auto-scale into the device ranges and sample with simulated annealing
//!    ([`anneal`]),
//! 5. unembed, decode and aggregate over a parameter grid ([`sweep`]).
//!
//! [`oracle`] enumerates tours and constraint strata exhaustively so that the
//! analytic properties of both formulations can be checked, [`hybrid`] splits
//! larger instances into annealer-sized pieces, and [`stats`] compares two
//! solving alternatives with the Wilcoxon rank-sum test.

pub mod anneal;
pub mod embedding;
mod error;
pub mod hybrid;
pub mod instance;
pub mod io;
pub mod oracle;
pub mod qubo;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};

/// Deterministic 64-bit mixer used to derive independent seeds from a master
/// seed and a list of indices (splitmix64 finalizer).
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts
        .iter()
        .fold(mix(master), |acc, &p| mix(acc ^ mix(p.wrapping_add(1))))
}
