//! Quantum and classical ergotropy computed along independent routes.
//!
//! * [`quantum`]: states, Hamiltonians, Gibbs states, entropies, dephasing.
//! * [`ergotropy`]: passive states and the ergotropy as a direct energy
//!   difference and as a difference of quantum and spectral relative
//!   entropies, plus the coherent/incoherent split.
//! * [`classical`]: the same construction for distributions on a discrete
//!   phase-space grid evolved by doubly stochastic kernels.
//! * [`geometric`]: point-mass states on the pure-state manifold, the
//!   geometric relative entropy and Monte Carlo geometric partition functions.
//! * [`workbench`]: driven systems, conditional thermal states and the
//!   sharpened maximum-work bound.
//!
//! Units: `k_B = 1`, natural logarithms throughout.

pub mod classical;
pub mod ergotropy;
mod error;
pub mod geometric;
pub mod io;
pub mod quantum;
pub mod random;
pub mod workbench;

pub use error::{Error, Result};
