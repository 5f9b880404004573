//! Pauli strings, generated groups and maximal subgroups.

use spinmirror::pauli::{group_closure, maximal_subgroup, pauli_mul, PauliString};

fn main() -> spinmirror::Result<()> {
    let a: PauliString = "XZZX".parse()?;
    let b: PauliString = "YZZY".parse()?;
    println!("{a} · {b} = {}", pauli_mul(&a, &b)?);
    println!("{a} and {b} commute: {}", a.commutes_with(&b));

    let seeds: Vec<PauliString> =
        ["IXXI", "IYYI", "XZZX", "YZZY"].iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let g = group_closure(4, &seeds)?;
    println!("closure of {} generators has {} elements", seeds.len(), g.len());

    let mut level = g;
    while level.len() > 1 {
        let next = maximal_subgroup(&level, &[])?;
        let dropped: Vec<String> = level.difference(&next).iter().map(|p| p.to_string()).collect();
        println!("|G| = {:2} -> {:2}, coset: {}", level.len(), next.len(), dropped.join(" "));
        level = next;
    }
    Ok(())
}
