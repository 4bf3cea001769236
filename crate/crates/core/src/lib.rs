//! Quantum reservoir computing on small transverse-field Ising systems, with
//! Krylov-space measures of expressivity and observability.
//!
//! The crate is organised bottom-up:
//!
//! * [`quantum`]: dense complex linear algebra, states and Hermitian operators.
//! * [`hamiltonian`]: Ising reservoirs, the four named presets and random ensembles.
//! * [`tasks`]: Lorenz63 data, task construction, uniform inputs and Legendre polynomials.
//! * [`reservoir`]: the encode / evolve / measure pipeline and the linear readout.
//! * [`ipc`]: information processing capacity over Legendre hyper-task targets.
//! * [`spectral`]: closed-form Krylov grades and brute-force rank oracles.
//! * [`krylov`]: Lanczos bases, spread and operator complexity, expressivity and observability.

pub mod hamiltonian;
pub mod ipc;
pub mod krylov;
pub mod quantum;
pub mod reservoir;
pub mod spectral;
pub mod tasks;

mod error;

pub use error::{Error, Result};
