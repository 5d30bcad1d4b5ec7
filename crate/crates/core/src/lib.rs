//! Grouped, randomized and deterministic estimation of Pauli-sum expectation
//! values, with exact variance evaluation on statevectors.

pub mod allocation;
pub mod covariance;
pub mod cover;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod pauli;
pub mod postprocess;
pub mod report;
pub mod sim;
pub mod state;
pub mod variance;

pub use error::{Error, Result};
pub use graph::{CommutationGraph, Mode};
pub use pauli::{parse_pauli_sum, PauliString, PauliSum, Phase};
pub use state::StateVector;
