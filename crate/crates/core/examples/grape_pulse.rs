//! GRAPE pulse synthesis: a single-spin X gate, then one factor of the
//! 4-spin mirror decomposition on a weakly coupled system. Writes the pulse
//! table to stdout as CSV.

use spinmirror::decompose::closed_form;
use spinmirror::grape::{grape_optimize, GrapeConfig, NmrSystemSpec};
use spinmirror::linalg::expm_hermitian;
use spinmirror::pauli::PauliString;

fn main() -> spinmirror::Result<()> {
    let system = NmrSystemSpec::from_json(include_str!("../data/nmr_one_spin.json"))?;
    let x: PauliString = "X".parse()?;
    let target = expm_hermitian(&x.matrix()?, std::f64::consts::FRAC_PI_2);
    let result = grape_optimize(&system, &target, &GrapeConfig::default())?;
    eprintln!("X gate: fidelity {:.9} in {} iterations", result.fidelity, result.iterations);
    result.pulse.write_csv(std::io::stdout())?;

    // a two-spin factor of the mirror propagator on a coupled pair
    let factor = closed_form(2)?.factors()[0];
    let pair = NmrSystemSpec::new(
        2,
        vec![300.0, -300.0],
        vec![vec![0.0, 120.0], vec![120.0, 0.0]],
        vec![vec![1], vec![2]],
        vec![1.0, 1.0],
    )?;
    let target = expm_hermitian(&factor.word.matrix()?, factor.angle);
    let config = GrapeConfig { steps: 40, dt: 1e-4, ..GrapeConfig::default() };
    let result = grape_optimize(&pair, &target, &config)?;
    eprintln!(
        "exp(-i {:+.4} {}): fidelity {:.9} in {} iterations, per scale {:?}",
        factor.angle, factor.word, result.fidelity, result.iterations, result.per_scale_fidelity
    );
    Ok(())
}
