//! Noisy-qubit joint measurements and the LSW noncontextuality test.
//!
//! The crate builds pairwise joint POVMs for unsharp spin observables along
//! trine axes, evaluates the average anticorrelation `R₃` against the
//! generalized-noncontextual bound `1 − η/3`, compiles each four-outcome POVM
//! into a cascade of two-outcome partial projections, and realizes the
//! cascade as a wave-plate / partially-polarizing-beam-splitter circuit that
//! can be propagated exactly or sampled.
//!
//! Modules, bottom-up:
//!
//! - [`qubit`]: closed-form 2×2 complex algebra and qubit states
//! - [`povm`]: noisy observables, trine axes, joint POVMs and their checks
//! - [`lsw`]: anticorrelation, `R₃`, bounds, η sweeps and significance
//! - [`cascade`]: rank-1 decomposition and sequential compilation
//! - [`optics`]: Jones-calculus circuit and seeded photon counting
//! - [`harness`]: configuration and end-to-end reports

pub mod cascade;
pub mod error;
pub mod harness;
pub mod lsw;
pub mod optics;
pub mod povm;
pub mod qubit;

pub use error::{Error, Result};
