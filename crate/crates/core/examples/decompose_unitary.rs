//! Numerical peeling of unitaries into Pauli exponentials: the 4-spin mirror
//! propagator and a random product of Pauli rotations.

use std::f64::consts::FRAC_PI_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spinmirror::chain::{build_hamiltonian, propagator, ChainSpec};
use spinmirror::decompose::{decompose, reconstruct};
use spinmirror::linalg::unitary_fidelity;
use spinmirror::selftest::random_pauli_product;

fn main() -> spinmirror::Result<()> {
    let u = propagator(&build_hamiltonian(&ChainSpec::engineered(4)?)?, FRAC_PI_2)?;
    let (d, trace) = decompose(&u, None)?;
    println!("mirror propagator, N = 4: {} factors over {} levels", d.len(), trace.levels.len());
    for f in d.factors() {
        println!("  exp(-i {:+.6} {})", f.angle, f.word);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let original = random_pauli_product(&mut rng, 3, 5);
    let v = reconstruct(&original)?;
    let (found, trace) = decompose(&v, None)?;
    println!("random 3-spin product of {} factors -> {} factors", original.len(), found.len());
    println!("  round-trip fidelity {:.15}", unitary_fidelity(&reconstruct(&found)?, &v));
    println!("  peel norms never decrease: {}", trace.is_monotone(1e-12));
    Ok(())
}
