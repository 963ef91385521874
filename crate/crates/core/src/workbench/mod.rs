//! Driven systems: protocol propagators, the conditional thermal state and
//! work accounting against the sharpened maximum-work bound.

mod protocol;
mod thermal;

pub use protocol::{
    evolve_unitary, evolve_unitary_converged, unitary_exponential, DrivingPath, DrivingProtocol, Knot, Propagator,
    REFINEMENT_TOL, UNITARITY_GATE,
};
pub use thermal::{
    conditional_thermal_state, sharpened_bound_report, work_accounting, AltBoundTerms, BoundTerms,
    ConditionalThermalState, WorkAccounting, WorkReport,
};
