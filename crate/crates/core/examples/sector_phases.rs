//! Phases picked up by each excitation-number sector under mirror inversion.

use spinmirror::mirror::TransferSetup;

fn main() -> spinmirror::Result<()> {
    for n in 2..=8 {
        let setup = TransferSetup::engineered(n)?;
        let table = setup.sector_phases();
        let rel: Vec<String> = (0..=n)
            .map(|k| {
                let p = table.relative(k);
                // round before printing so tiny residues don't show as −0
                let r = |v: f64| v.round() + 0.0;
                format!("{:+}{:+}i", r(p.re), r(p.im))
            })
            .collect();
        println!("N = {n}: φ_k/φ_0 = [{}]", rel.join(", "));
    }
    Ok(())
}
