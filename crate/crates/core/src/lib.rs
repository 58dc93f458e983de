//! Planning peer-leader interventions on partially observed social networks.
//!
//! The pipeline has three stages:
//!
//! 1. [`sampler`] discovers part of the network through a budget of interview
//!    queries, pairing every uniformly random query with a query to one of the
//!    respondent's contacts.
//! 2. [`robust`] picks seeds that do well for every propagation probability in
//!    an uncertainty set, by solving a max-min problem over marginal vectors and
//!    rounding the result.
//! 3. [`planner`] repeats the robust step over several recruitment rounds,
//!    conditioning on the peer leaders that actually showed up.
//!
//! Diffusion follows the independent cascade model ([`cascade`]); [`greedy`]
//! supplies the per-scenario normalizers. [`generate`] and [`experiment`] run
//! the whole thing in silico.
//!
//! With the default `parallel` feature, Monte Carlo loops run on rayon. Every
//! random quantity is drawn from a counter-based stream keyed by a fixed chunk
//! index, so results are bit-identical whatever the thread count, and also
//! identical with the feature turned off.

pub mod cascade;
pub mod enumerate;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod greedy;
pub mod netgraph;
pub mod par;
pub mod planner;
pub mod rng;
pub mod robust;
pub mod sampler;
pub mod trace;

pub use error::{Error, Result};
pub use netgraph::{Graph, NodeIdx, ObservedNetwork, Roster};
