//! Product decomposition of unitaries into Pauli exponentials by recursive
//! subgroup peeling, and the closed forms for engineered chains.

mod closed_form;
mod expansion;
mod peel;
mod product;

pub use closed_form::{alternating_word, closed_form};
pub use expansion::{
    angle_profile, best_angle, coefficient, expand, expand_full, norm, optimal_angle, w_value,
    AngleProfile, ExpansionTable,
};
pub use peel::{peel_level, LevelOutcome, LevelTrace, PeelConfig, PeelStep, PeelTrace};
pub use product::{reconstruct, Factor, ProductDecomposition};

use crate::error::{Error, Result};
use crate::linalg::{
    qubits_for_dim, unitarity_error, unitary_fidelity, CMatrix, MAX_DENSE_QUBITS,
    UNITARITY_TOLERANCE,
};
use crate::pauli::{maximal_subgroup, support_group, PauliGroup, SubgroupChain};

/// A level is complete once `1 − norm` on the child group is at most this.
pub const PEEL_TOLERANCE: f64 = 1e-9;
/// `|W|`, `|Δ|` and norm gains at or below this are treated as zero.
pub const STALL_TOLERANCE: f64 = 1e-12;
/// Round trips below `1 − ROUND_TRIP_TOLERANCE` are reported as failures.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-9;
/// Alternative child groups tried when a level of an automatic chain fails.
const MAX_ALTERNATIVES: usize = 8;

/// Decomposes `u` with default settings; see [`decompose_with`].
pub fn decompose(
    u: &CMatrix,
    chain: Option<&SubgroupChain>,
) -> Result<(ProductDecomposition, PeelTrace)> {
    decompose_with(u, chain, &PeelConfig::default())
}

/// Peels `u` down a subgroup chain and returns factors in product order.
///
/// Without a chain, the top level is the closure of `u`'s support and each
/// next level is a maximal subgroup of the previous one; if a level fails to
/// converge, a few other maximal subgroups are tried before giving up.
pub fn decompose_with(
    u: &CMatrix,
    chain: Option<&SubgroupChain>,
    config: &PeelConfig,
) -> Result<(ProductDecomposition, PeelTrace)> {
    let n = qubits_for_dim(u.nrows())?;
    if u.ncols() != u.nrows() {
        return Err(Error::Dimension("matrix is not square".into()));
    }
    let err = unitarity_error(u);
    if err > UNITARITY_TOLERANCE {
        return Err(Error::Validation(format!("input is not unitary (error {err:e})")));
    }
    let mut trace = PeelTrace::default();
    let table = match chain {
        Some(chain) => {
            if chain.top().n_sites() != n {
                return Err(Error::Dimension(format!(
                    "chain on {} sites for a {n}-qubit unitary",
                    chain.top().n_sites()
                )));
            }
            let mut table = expand(u, chain.top())?;
            for pair in chain.levels().windows(2) {
                let (next, steps) = peel::peel_table(table, &pair[0], &pair[1], config)?;
                trace.levels.push(LevelTrace {
                    parent_size: pair[0].len(),
                    child: pair[1].clone(),
                    steps,
                });
                table = next;
            }
            table
        }
        None => {
            let top = support_group(u)?;
            let table = expand(u, &top)?;
            peel_automatic(table, top, config, &mut trace)?
        }
    };

    let residual = table.get(&crate::pauli::PauliString::identity(n));
    if (residual.norm() - 1.0).abs() > ROUND_TRIP_TOLERANCE {
        return Err(Error::DecompositionFailed(format!(
            "final residual {residual} is not a pure phase"
        )));
    }
    // U·Π_k exp(iθ_k D_k) = phase  ⇒  U = phase·exp(−iθ_m D_m)⋯exp(−iθ_1 D_1)
    let factors: Vec<Factor> = trace
        .levels
        .iter()
        .flat_map(|l| l.steps.iter())
        .rev()
        .map(|s| Factor { word: s.word, angle: s.angle })
        .collect();
    let decomposition = ProductDecomposition::new(n, factors, residual / residual.norm())?;

    if n <= MAX_DENSE_QUBITS {
        let fidelity = unitary_fidelity(&reconstruct(&decomposition)?, u);
        trace.reconstruction_fidelity = Some(fidelity);
        if fidelity < 1.0 - ROUND_TRIP_TOLERANCE {
            return Err(Error::DecompositionFailed(format!(
                "reconstruction fidelity {fidelity} below 1 − {ROUND_TRIP_TOLERANCE:e}"
            )));
        }
    }
    Ok((decomposition, trace))
}

fn peel_automatic(
    mut table: ExpansionTable,
    mut parent: PauliGroup,
    config: &PeelConfig,
    trace: &mut PeelTrace,
) -> Result<ExpansionTable> {
    while !parent.is_trivial() {
        let first = maximal_subgroup(&parent, &[])?;
        let mut children = vec![first.clone()];
        let mut last_error = None;
        let mut done = None;
        let mut k = 0;
        while k < children.len() {
            let child = &children[k];
            match peel::peel_table(table.clone(), &parent, child, config) {
                Ok(found) => {
                    done = Some((child.clone(), found));
                    break;
                }
                Err(e @ Error::DecompositionFailed(_)) => {
                    last_error = Some(e);
                    // force a different hyperplane by excluding one element of the first choice
                    if k == 0 {
                        for e in first.iter().filter(|p| !p.is_identity()) {
                            if children.len() > MAX_ALTERNATIVES {
                                break;
                            }
                            if let Ok(alt) = maximal_subgroup(&parent, &[*e]) {
                                if alt.len() == first.len() && !children.contains(&alt) {
                                    children.push(alt);
                                }
                            }
                        }
                    }
                }
                Err(e) => return Err(e),
            }
            k += 1;
        }
        let Some((child, (next, steps))) = done else {
            return Err(last_error.unwrap_or_else(|| {
                Error::DecompositionFailed("no subgroup admitted a convergent peel".into())
            }));
        };
        trace.levels.push(LevelTrace { parent_size: parent.len(), child: child.clone(), steps });
        table = next;
        parent = child;
    }
    Ok(table)
}
