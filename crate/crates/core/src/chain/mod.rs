//! XY spin chains: specification, Hamiltonian, spectrum and time evolution.

mod hamiltonian;
mod propagate;
mod spec;
mod spectrum;
mod state;

pub use hamiltonian::{
    build_hamiltonian, excitation_count, reverse_bits, single_excitation_matrix, total_z,
};
pub use propagate::{evolve, propagator};
pub use spec::{engineered_couplings, ChainSpec, ChainSpecFile, SYMMETRY_TOLERANCE};
pub use spectrum::{
    check_mirror_condition, parity_adapted_eigen, reversal, wrap_phase, Mode, SpectralReport,
    DEGENERACY_TOLERANCE, MAX_WITNESS, PHASE_TOLERANCE,
};
pub use state::QuantumState;
