//! Single-excitation spectra and the mirror-inversion condition.

use std::f64::consts::FRAC_PI_2;

use spinmirror::chain::{check_mirror_condition, ChainSpec};

fn main() -> spinmirror::Result<()> {
    for n in 2..=8 {
        let report = check_mirror_condition(&ChainSpec::engineered(n)?, FRAC_PI_2)?;
        let ladder: Vec<String> = report.eigenvalues().iter().map(|l| format!("{l:+.3}")).collect();
        println!("engineered N = {n}: satisfied = {}  λ = [{}]", report.satisfied, ladder.join(", "));
    }
    for n in [3, 4, 5] {
        let report = check_mirror_condition(&ChainSpec::uniform(n, 1.0)?, FRAC_PI_2)?;
        println!("uniform    N = {n}: satisfied = {}", report.satisfied);
    }
    Ok(())
}
