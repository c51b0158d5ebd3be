//! Ground-state solver for qubit Hamiltonians built on the qubit
//! coupled-cluster ansatz: a product of spin coherent states correlated by
//! a short list of Pauli-word exponentials ("entanglers").
//!
//! The crate provides
//!
//! - exact Pauli-word algebra and closed-form similarity transforms ([`pauli`]),
//! - a dense statevector oracle for verification ([`simstate`]),
//! - Hamiltonian file ingestion and stationary-qubit sector reduction ([`hamio`]),
//! - qubit mean-field optimization over Bloch angles, with an optional
//!   spin-symmetry penalty ([`meanfield`]),
//! - joint amplitude/angle minimization of the correlated energy ([`qcc`]),
//! - energy-derivative-based screening and ranking of candidate
//!   entanglers ([`rank`]),
//! - exact factorization of multi-qubit entanglers into two-qubit
//!   ones ([`factor`]).

pub mod factor;
pub mod hamio;
pub mod meanfield;
pub mod optim;
pub mod pauli;
pub mod qcc;
pub mod rank;
pub mod simstate;

pub use hamio::ProblemInstance;
pub use meanfield::{BlochConfig, QmfOptions, QmfResult};
pub use pauli::{Axis, PauliSum, PauliWord, Phase};
pub use qcc::{EntanglerSet, QccOptions, QccResult};
pub use simstate::{SpectrumResult, StateVector};
