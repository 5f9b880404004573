//! Single-spin states moved to the mirror site, including a deviation input
//! whose image picks up a string of Z operators.

use spinmirror::chain::{build_hamiltonian, evolve, propagator, ChainSpec, QuantumState};
use spinmirror::decompose::expand_full;
use spinmirror::mirror::{six_state_design, SiteInput, TransferSetup};
use spinmirror::pauli::PauliString;

fn main() -> spinmirror::Result<()> {
    let setup = TransferSetup::engineered(6)?;
    for (label, ket) in six_state_design() {
        let r = setup.single(1, &SiteInput::Ket(ket))?;
        println!("N = 6: {label} on site 1 -> site {}  F = {:.12}", r.destination_sites[0], r.fidelity);
    }

    // σˣ on site 1 of a 5-spin chain evolves into a Pauli string
    let n = 5;
    let u = propagator(&build_hamiltonian(&ChainSpec::engineered(n)?)?, std::f64::consts::FRAC_PI_2)?;
    let x1: PauliString = "XIIII".parse()?;
    let rho = QuantumState::deviation(x1.matrix()?)?;
    let out = evolve(&rho, &u)?.density_matrix();
    for (word, coeff) in expand_full(&out)?.nonzero() {
        println!("σˣ₁ -> {:+.6} {word}", coeff.re);
    }
    Ok(())
}
