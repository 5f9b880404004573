use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::hamiltonian::single_excitation_matrix;
use super::spec::ChainSpec;
use crate::error::{Error, Result};

/// Absolute tolerance on `ε_ν τ + φ₀ − (2n + b)π`.
pub const PHASE_TOLERANCE: f64 = 1e-9;
/// Largest witness `|n(ν)|` accepted before the search is abandoned.
pub const MAX_WITNESS: i64 = 64;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// One single-excitation mode.
#[derive(Debug, Clone, Serialize)]
pub struct Mode {
    /// Rank with `ν = 0` at the highest eigenvalue.
    pub label: usize,
    pub eigenvalue: f64,
    /// `+1` for site-reversal symmetric eigenvectors, `−1` for antisymmetric.
    pub parity: i8,
    /// Integer `n(ν)` with `ε_ν τ + φ₀ = (2n + b_ν)π`, if one exists.
    pub witness: Option<i64>,
    pub residual: f64,
    pub vector: Vec<f64>,
}

/// Outcome of the spectral mirror test, modes in ascending energy.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub time: f64,
    pub global_phase: f64,
    pub modes: Vec<Mode>,
    /// Parities alternate as `(−1)^ν` down from the top of the spectrum.
    pub parities_alternate: bool,
    pub degenerate: bool,
    pub satisfied: bool,
}

impl SpectralReport {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }
}

/// Eigen-decomposition of the one-excitation block with eigenvectors chosen
/// to be parity eigenstates (inside degenerate clusters too). Ascending order.
pub fn parity_adapted_eigen(spec: &ChainSpec) -> Result<(Vec<f64>, Vec<DVector<f64>>, Vec<i8>)> {
    if !spec.is_mirror_symmetric() {
        return Err(Error::Precondition("chain is not mirror symmetric".into()));
    }
    let n = spec.n_sites();
    let h1 = single_excitation_matrix(spec);
    let eig = SymmetricEigen::new(h1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors: Vec<DVector<f64>> =
        order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();

    let reverse = |v: &DVector<f64>| DVector::from_fn(n, |i, _| v[n - 1 - i]);
    let mut parities = vec![0i8; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[start]).abs() <= DEGENERACY_TOLERANCE {
            end += 1;
        }
        // project the cluster onto the ±1 eigenspaces of the reversal and
        // re-orthonormalise; the split sizes are fixed by the cluster
        let mut adapted = Vec::new();
        for sign in [1.0, -1.0] {
            let mut basis: Vec<DVector<f64>> = Vec::new();
            for v in &vectors[start..end] {
                let mut p = (v + reverse(v) * sign) * 0.5;
                for b in &basis {
                    let overlap = b.dot(&p);
                    p -= b * overlap;
                }
                let norm = p.norm();
                if norm > 1e-6 {
                    basis.push(p / norm);
                }
            }
            adapted.extend(basis.into_iter().map(|b| (b, sign as i8)));
        }
        if adapted.len() != end - start {
            return Err(Error::Validation("parity adaptation lost a vector".into()));
        }
        for (k, (v, p)) in adapted.into_iter().enumerate() {
            vectors[start + k] = v;
            parities[start + k] = p;
        }
        start = end;
    }
    Ok((values, vectors, parities))
}

/// Tests `e^{−iε_ν τ} = e^{iφ₀} p_ν` for every single-excitation mode.
pub fn check_mirror_condition(spec: &ChainSpec, time: f64) -> Result<SpectralReport> {
    if !time.is_finite() {
        return Err(Error::Domain("mirror time must be finite".into()));
    }
    if spec.couplings().iter().any(|j| *j < 0.0) {
        return Err(Error::Precondition(
            "negative couplings: the parity ordering of modes is not guaranteed".into(),
        ));
    }
    let n = spec.n_sites();
    let (values, vectors, parities) = parity_adapted_eigen(spec)?;
    let degenerate = values.windows(2).any(|w| (w[1] - w[0]).abs() <= DEGENERACY_TOLERANCE);

    let b = |p: i8| if p > 0 { 0.0 } else { 1.0 };
    let top = n - 1;
    let global_phase = wrap_phase(b(parities[top]) * PI - values[top] * time);

    let mut modes = Vec::with_capacity(n);
    let mut satisfied = true;
    let mut parities_alternate = true;
    for k in 0..n {
        let label = n - 1 - k;
        let target = values[k] * time + global_phase;
        let m = (target / PI - b(parities[k])) / 2.0;
        let w = m.round();
        let residual = (target - (2.0 * w + b(parities[k])) * PI).abs();
        let witness = (residual <= PHASE_TOLERANCE && w.abs() <= MAX_WITNESS as f64)
            .then_some(w as i64);
        satisfied &= witness.is_some();
        let expected = if label.is_multiple_of(2) { 1 } else { -1 };
        parities_alternate &= parities[k] == expected;
        modes.push(Mode {
            label,
            eigenvalue: values[k],
            parity: parities[k],
            witness,
            residual,
            vector: vectors[k].iter().copied().collect(),
        });
    }
    Ok(SpectralReport {
        n,
        time,
        global_phase,
        modes,
        parities_alternate,
        degenerate,
        satisfied,
    })
}

/// Phase in `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// The reversal permutation `R` on `N` sites.
pub fn reversal(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engineered_spectrum_is_equally_spaced() {
        for n in 2..=12 {
            let r = check_mirror_condition(&ChainSpec::engineered(n).unwrap(), PI / 2.0).unwrap();
            for (k, m) in r.modes.iter().enumerate() {
                let expected = 2.0 * k as f64 - (n as f64 - 1.0);
                assert!((m.eigenvalue - expected).abs() < 1e-10, "n={n} k={k}");
            }
            assert!(r.satisfied, "n={n}");
            assert!(r.parities_alternate, "n={n}");
            assert!(!r.degenerate);
        }
    }

    #[test]
    fn uniform_chain_fails_beyond_three_sites() {
        for n in 4..=8 {
            let spec = ChainSpec::uniform(n, 1.0).unwrap();
            for t in [0.5, 1.0, PI / 2.0, 2.0, PI] {
                assert!(!check_mirror_condition(&spec, t).unwrap().satisfied, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn wrong_time_fails() {
        let r = check_mirror_condition(&ChainSpec::engineered(5).unwrap(), 1.0).unwrap();
        assert!(!r.satisfied);
    }

    #[test]
    fn asymmetric_chain_is_rejected() {
        let spec = ChainSpec::new(3, vec![1.0, 2.0], vec![0.0; 3]).unwrap();
        assert!(matches!(check_mirror_condition(&spec, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn degenerate_cluster_gets_parity_vectors() {
        // two decoupled pairs with equal couplings: eigenvalues ±1 twice
        let spec = ChainSpec::new(4, vec![1.0, 0.0, 1.0], vec![0.0; 4]).unwrap();
        let (values, vectors, parities) = parity_adapted_eigen(&spec).unwrap();
        assert!((values[0] - values[1]).abs() < 1e-12);
        let r = reversal(4);
        for (v, p) in vectors.iter().zip(&parities) {
            let rv = &r * v;
            assert!((rv - v * (*p as f64)).norm() < 1e-10);
        }
        assert!(check_mirror_condition(&spec, 1.0).unwrap().degenerate);
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }
}
