//! Node-state probability dynamics for Markovian SIR and multi-class SEIR
//! contagion on networks.
//!
//! The library is organised around three routes to the same quantities:
//!
//! * deterministic ODE systems for per-node state probabilities — an exact
//!   system on rooted trees (single initially non-susceptible node on a tree)
//!   and an upper-bound system on arbitrary networks ([`sir`], [`seir`],
//!   integrated by [`integrate`]);
//! * exact stochastic simulation of the underlying Markov process with
//!   reproducible ensemble averaging ([`stochastic`]);
//! * direct solution of the master equation over the joint state space of
//!   small networks ([`oracle`]), used as ground truth in tests.
//!
//! Networks, rate parameters and file formats live in [`net`].

#![deny(missing_docs)]

pub mod canonical;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod net;
pub mod oracle;
pub mod rng;
pub mod seir;
pub mod sir;
pub mod state;
pub mod stochastic;

pub use error::{Error, Result};
pub use net::{ContagionNetwork, InitialCondition, Model, RootedTreeInfo};
pub use state::NodeProbabilityState;
