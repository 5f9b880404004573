//! Pauli words, their exact products, dense realizations and phase-free groups.

mod group;
mod string;

pub use group::{
    for_each_pauli_coefficient, group_closure, maximal_subgroup, support_group, PauliGroup,
    SubgroupChain, SUPPORT_TOLERANCE,
};
pub use string::{
    pauli_matrix, pauli_mul, right_multiply, Letter, PauliString, Phase, PhasedPauli, MAX_SITES,
};
