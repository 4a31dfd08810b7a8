//! Decentralized projected subgradient methods for weakly convex problems
//! over time-varying networks.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is on.
//! `parallel` distributes per-agent work over rayon without changing results.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod config;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod math;
pub mod network;
pub mod objective;
pub mod rng;
pub mod solver;
pub mod stepsize;
pub mod theory_checks;

pub use error::{Error, Result};
pub use geometry::{prox, FeasibleSet, ProxResult};
pub use network::{Graph, MixingMatrix, MixingSchedule};
pub use objective::{Batch, ObjectiveOracle, PhaseRetrievalInstance};
pub use rng::{derive_stream, RngStream};
pub use solver::{run, AgentStates, RunRecord};
pub use stepsize::StepsizePolicy;
