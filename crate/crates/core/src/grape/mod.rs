//! Piecewise-constant pulse synthesis (GRAPE) on a weak-coupling NMR drift.

mod optimize;
mod pulse;
mod system;

pub use optimize::{
    fidelity_hs, finite_difference_gradient, grape_optimize, objective_and_gradient, propagate,
    propagate_scaled, GrapeConfig, GrapeResult, InitialPulse,
};
pub use pulse::PulseSequence;
pub use system::{
    control_operators, drift_hamiltonian, equilibrium_deviation, NmrSystemSpec, GAMMA_F_OVER_H,
};
