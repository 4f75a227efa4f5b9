//! Posterior inference of network structure from observed information cascades.
//!
//! The crate samples graphs from `P(G | C)` with a Metropolis-Hastings chain whose
//! likelihood is the continuous-time independent cascade model. Per-cascade sums over
//! spanning arborescences are evaluated with the directed matrix-tree theorem; because
//! every arc of a cascade points forward in time the root-deleted Laplacian is
//! triangular and each cascade reduces to a product of parent-weight sums, which the
//! sampler updates in O(1) per edge toggle.
//!
//! Everything here is `no_std` (with `alloc`). File formats, threading and the
//! command-line front end live in the `netinfer` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cascade;
pub mod error;
pub mod eval;
pub mod generators;
pub mod graph;
pub mod likelihood;
pub mod sampler;
pub mod seed;

pub use cascade::{
    Activation, Cascade, CascadeIndex, CoverageRun, CoverageTracker, TransmissionTree,
};
pub use error::{Error, Result};
pub use eval::{EdgeMarginals, RocCurve};
pub use generators::{GeneratorKind, GeneratorSpec};
pub use graph::{DyadSpace, Graph, Mode, NodeId, ToggleOutcome};
pub use likelihood::{CascadeState, DeltaRecord, ModelParams, WeightConfig};
pub use sampler::{Chain, ChainConfig, ChainOutput, ChainStats, PriorConfig, ProposalKind};
