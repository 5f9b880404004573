//! Analytic product form of the engineered mirror propagator, checked
//! against the exact propagator.

use std::f64::consts::FRAC_PI_2;

use spinmirror::chain::{build_hamiltonian, propagator, ChainSpec};
use spinmirror::decompose::{closed_form, reconstruct};
use spinmirror::linalg::max_abs_diff;

fn main() -> spinmirror::Result<()> {
    for n in 2..=8 {
        let d = closed_form(n)?;
        let u = propagator(&build_hamiltonian(&ChainSpec::engineered(n)?)?, FRAC_PI_2)?;
        let err = max_abs_diff(&reconstruct(&d)?, &u);
        let factors: Vec<String> =
            d.factors().iter().map(|f| format!("{}({:+.4})", f.word, f.angle)).collect();
        println!("N = {n}  phase {:+.0}{:+.0}i  max error {err:.1e}", d.global_phase().re, d.global_phase().im);
        println!("  {}", factors.join(" "));
    }
    Ok(())
}
