//! Internal diffusion limited aggregation (IDLA) dispersion on finite graphs.
//!
//! * [`graph`]: graph families and edge-list input.
//! * [`walk`]: exact hitting, commute, mixing and spectral quantities.
//! * [`idla`]: sequential, parallel and uniform dispersion simulators.
//! * [`blocks`]: the trajectory-array representation and the cut & paste
//!   transforms relating the processes.
//! * [`bounds`]: computable dispersion-time bounds and closed-form oracles.
//! * [`harness`]: seeded Monte Carlo experiments and verifiers.

pub mod blocks;
pub mod bounds;
pub mod error;
pub mod graph;
pub mod harness;
pub mod idla;
pub mod rng;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{generate, validate, Diagnostics, Graph, GraphSpec, Vertex};
