//! Discrete phase-space analog: grid distributions, doubly stochastic
//! kernels, joint distributions and their relative entropies.

mod entropy;
mod grid;
mod kernel;
mod probe;

pub use entropy::{
    classical_ergotropy, classical_relative_entropy, ergotropy_via_phi, inhomogeneity_phi, joint_relative_entropy,
    permutation_min_bruteforce, sorted_pairing_kl, MAX_BRUTEFORCE_CELLS,
};
pub use grid::{grid_gibbs, microcanonical, GridDistribution, PhaseGrid, Surface};
pub use kernel::{compose_kernels, joint_from_kernel, JointDistribution, TransitionKernel};
pub use probe::{stationarity_probe, stationarity_scaling, ScalingReport, StationarityReport};
