use nalgebra::DMatrix;

use super::spec::ChainSpec;
use crate::error::Result;
use crate::linalg::{c, check_dense_qubits, CMatrix};

/// Dense XY Hamiltonian `½ Σ J_i (X_i X_{i+1} + Y_i Y_{i+1}) + Σ h_i n_i`.
///
/// `n_i = |1⟩⟨1|` is the occupation of site `i`, so the field term is the
/// number-conserving `h_i c_i† c_i` and the single-excitation block has
/// `h_i` on its diagonal. With the Pauli matrices used throughout the crate
/// (`Z = diag(1, −1)`), `n_i = (1 − Z_i)/2`.
pub fn build_hamiltonian(spec: &ChainSpec) -> Result<CMatrix> {
    let n = spec.n_sites();
    check_dense_qubits(n)?;
    let d = 1usize << n;
    let mut h = CMatrix::zeros(d, d);
    let bit = |site: usize| 1usize << (n - site);
    for state in 0..d {
        let mut diag = 0.0;
        for (k, hk) in spec.fields().iter().enumerate() {
            if state & bit(k + 1) != 0 {
                diag += hk;
            }
        }
        h[(state, state)] = c(diag, 0.0);
        // XX + YY = 2(σ⁺σ⁻ + σ⁻σ⁺): swaps a 01/10 pair with amplitude 2
        for (k, jk) in spec.couplings().iter().enumerate() {
            let pair = bit(k + 1) | bit(k + 2);
            let occ = state & pair;
            if occ != 0 && occ != pair {
                h[(state ^ pair, state)] += c(*jk, 0.0);
            }
        }
    }
    Ok(h)
}

/// The `N × N` tridiagonal block on the one-excitation sector: `h_i` on the
/// diagonal and `J_i` beside it.
pub fn single_excitation_matrix(spec: &ChainSpec) -> DMatrix<f64> {
    let n = spec.n_sites();
    let mut m = DMatrix::zeros(n, n);
    for (i, h) in spec.fields().iter().enumerate() {
        m[(i, i)] = *h;
    }
    for (i, j) in spec.couplings().iter().enumerate() {
        m[(i, i + 1)] = *j;
        m[(i + 1, i)] = *j;
    }
    m
}

/// `Σ_i Z_i` as a diagonal matrix.
pub fn total_z(n: usize) -> Result<CMatrix> {
    check_dense_qubits(n)?;
    let d = 1usize << n;
    Ok(CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let ones = i.count_ones() as f64;
            c(n as f64 - 2.0 * ones, 0.0)
        } else {
            c(0.0, 0.0)
        }
    }))
}

/// Number of `1` bits of a basis index: the excitation count.
pub fn excitation_count(state: usize) -> usize {
    state.count_ones() as usize
}

/// Index of the site-reversed basis state.
pub fn reverse_bits(state: usize, n: usize) -> usize {
    let mut out = 0;
    for k in 0..n {
        if state & (1 << k) != 0 {
            out |= 1 << (n - 1 - k);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, hermiticity_error, max_abs, ZERO};
    use crate::pauli::PauliString;

    #[test]
    fn two_site_flip_flop_block() {
        let h = build_hamiltonian(&ChainSpec::new(2, vec![1.0], vec![0.0, 0.0]).unwrap()).unwrap();
        // |01> = index 1, |10> = index 2
        assert_eq!(h[(1, 2)], c(1.0, 0.0));
        assert_eq!(h[(2, 1)], c(1.0, 0.0));
        let nonzero = h.iter().filter(|z| **z != ZERO).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn matches_pauli_word_construction() {
        let spec = ChainSpec::new(3, vec![0.7, -1.3], vec![0.2, 0.0, -0.4]).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let mut expected = CMatrix::zeros(8, 8);
        let word = |s: &str| s.parse::<PauliString>().unwrap().matrix().unwrap();
        for (k, j) in spec.couplings().iter().enumerate() {
            for l in ['X', 'Y'] {
                let mut letters = ['I'; 3];
                letters[k] = l;
                letters[k + 1] = l;
                expected += word(&letters.iter().collect::<String>()) * c(0.5 * j, 0.0);
            }
        }
        for (k, hk) in spec.fields().iter().enumerate() {
            let mut letters = ['I'; 3];
            letters[k] = 'Z';
            let z = word(&letters.iter().collect::<String>());
            expected += (CMatrix::identity(8, 8) - z) * c(0.5 * hk, 0.0);
        }
        assert!(crate::linalg::max_abs_diff(&h, &expected) < 1e-14);
        assert!(hermiticity_error(&h) == 0.0);
    }

    #[test]
    fn commutes_with_total_z() {
        let spec = ChainSpec::new(4, vec![0.3, 1.1, 2.0], vec![0.5, -0.2, 0.0, 1.0]).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let comm = commutator(&h, &total_z(4).unwrap());
        assert!(max_abs(&comm) <= 1e-12);
    }

    #[test]
    fn single_excitation_examples() {
        let m = single_excitation_matrix(&ChainSpec::new(2, vec![3.0], vec![1.0, 1.0]).unwrap());
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 1.0]));
    }

    #[test]
    fn five_site_block_is_twice_spin_two_jx() {
        // spin-2 Jx: <m±1|Jx|m> = ½√(j(j+1) − m(m±1))
        let j = 2.0f64;
        let ms = [2.0, 1.0, 0.0, -1.0, -2.0];
        let mut jx = DMatrix::zeros(5, 5);
        for k in 0..4 {
            let m = ms[k + 1];
            let v = 0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            jx[(k, k + 1)] = v;
            jx[(k + 1, k)] = v;
        }
        let h1 = single_excitation_matrix(&ChainSpec::engineered(5).unwrap());
        assert!((h1 - jx * 2.0).abs().max() < 1e-14);
    }

    #[test]
    fn single_excitation_block_is_embedded_in_full_hamiltonian() {
        let spec = ChainSpec::new(4, vec![0.3, 1.1, 0.3], vec![0.5, -0.2, -0.2, 0.5]).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let h1 = single_excitation_matrix(&spec);
        let idx = |site: usize| 1usize << (4 - site);
        for a in 1..=4 {
            for b in 1..=4 {
                assert!((h[(idx(a), idx(b))].re - h1[(a - 1, b - 1)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bit_reversal() {
        assert_eq!(reverse_bits(0b10000, 5), 0b00001);
        assert_eq!(reverse_bits(0b11010, 5), 0b01011);
        assert_eq!(excitation_count(0b1011), 3);
    }
}
