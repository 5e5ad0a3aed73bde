//! Pauli-frame Monte Carlo simulation of long-distance entanglement
//! distribution in two-dimensional quantum networks.
//!
//! Every edge of the network is a Bell-diagonal two-qubit state, so an
//! ensemble member is fully described by classical bit-flip/phase-flip bits.
//! The crate builds planar lattices and their duals, dilutes them by bond
//! percolation, runs the global error correction decoder (plaquette
//! syndromes, minimum-weight perfect matching on the dual, residual parity
//! groups) and provides the closed-form state and threshold analytics that
//! go with it.
//!
//! Trials are independent and are fanned out through [`Executor`]. With the
//! default `parallel` feature the executor uses rayon; without it every run is
//! sequential. Results never depend on the worker count.

pub mod analysis;
pub mod exec;
pub mod experiments;
pub mod gec;
pub mod lattice;
pub mod percolation;
pub mod rng;
pub mod states;
pub mod stats;

pub use exec::Executor;
pub use lattice::{Geometry, Network};

use thiserror::Error;

/// Top-level error used by the experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lattice(#[from] lattice::LatticeError),
    #[error(transparent)]
    State(#[from] states::StateError),
    #[error(transparent)]
    Gec(#[from] gec::GecError),
    #[error(transparent)]
    Analysis(#[from] analysis::AnalysisError),
    #[error("invalid grid `{spec}`: {reason}")]
    Grid { spec: String, reason: String },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
