//! Bell pairs sent through a mirror-inverting chain, as pure states and as
//! traceless deviation matrices.

use spinmirror::mirror::{BellKind, TransferMode, TransferSetup};

fn main() -> spinmirror::Result<()> {
    for n in [4, 5, 6] {
        let setup = TransferSetup::engineered(n)?;
        for mode in [TransferMode::Pure, TransferMode::Deviation] {
            for kind in BellKind::ALL {
                let r = setup.entangled((1, 2), kind, mode)?;
                println!(
                    "N = {n} {mode:?}: {kind} on (1,2) -> {} on ({},{})  F = {:.12}",
                    r.bell_output.map_or("?".into(), |k| k.to_string()),
                    r.destination_sites[0],
                    r.destination_sites[1],
                    r.fidelity
                );
            }
        }
    }
    Ok(())
}
