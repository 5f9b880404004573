use super::state::QuantumState;
use crate::error::{Error, Result};
use crate::linalg::{expm_hermitian, hermiticity_error, is_square, CMatrix, HERMITICITY_TOLERANCE};

/// `U(t) = exp(−i H t)`.
///
/// The spectral decomposition runs per connected block of `H`; for the XY
/// chain these are the excitation-number sectors, so a 12-site chain never
/// diagonalises anything larger than 924 × 924.
pub fn propagator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    if !is_square(h) || !h.nrows().is_power_of_two() {
        return Err(Error::Dimension(format!("{}x{} Hamiltonian", h.nrows(), h.ncols())));
    }
    if !t.is_finite() {
        return Err(Error::Domain("evolution time must be finite".into()));
    }
    let err = hermiticity_error(h);
    if err > HERMITICITY_TOLERANCE {
        return Err(Error::Validation(format!("Hamiltonian is not Hermitian (error {err:e})")));
    }
    Ok(expm_hermitian(h, t))
}

/// Applies a unitary to a state: `U|ψ⟩` or `U ρ U†`.
pub fn evolve(state: &QuantumState, u: &CMatrix) -> Result<QuantumState> {
    if u.nrows() != state.dim() || u.ncols() != state.dim() {
        return Err(Error::Dimension(format!(
            "{}x{} unitary on a {}-dimensional state",
            u.nrows(),
            u.ncols(),
            state.dim()
        )));
    }
    Ok(match state {
        QuantumState::Pure(psi) => QuantumState::Pure(u * psi),
        QuantumState::Mixed(rho) => QuantumState::Mixed(u * rho * u.adjoint()),
        QuantumState::Deviation(rho) => QuantumState::Deviation(u * rho * u.adjoint()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hamiltonian, ChainSpec};
    use crate::linalg::{c, max_abs_diff, unitarity_error};

    #[test]
    fn zero_time_is_identity() {
        let h = build_hamiltonian(&ChainSpec::engineered(4).unwrap()).unwrap();
        let u = propagator(&h, 0.0).unwrap();
        assert!(max_abs_diff(&u, &CMatrix::identity(16, 16)) < 1e-14);
    }

    #[test]
    fn group_law_and_unitarity() {
        let h = build_hamiltonian(&ChainSpec::new(4, vec![0.4, 1.2, 0.4], vec![0.3; 4]).unwrap())
            .unwrap();
        let a = propagator(&h, 0.37).unwrap();
        let b = propagator(&h, 1.1).unwrap();
        let ab = propagator(&h, 1.47).unwrap();
        assert!(max_abs_diff(&(&a * &b), &ab) < 1e-12);
        assert!(unitarity_error(&ab) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(propagator(&h, 1.0), Err(Error::Validation(_))));
        assert!(matches!(propagator(&CMatrix::zeros(3, 3), 1.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn matches_taylor_series() {
        let h = build_hamiltonian(&ChainSpec::new(3, vec![0.5, -0.2], vec![0.1, 0.2, 0.3]).unwrap())
            .unwrap();
        let t = 0.3;
        let a = &h * c(0.0, -t);
        let mut term = CMatrix::identity(8, 8);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / c(k as f64, 0.0);
            sum += &term;
        }
        assert!(max_abs_diff(&propagator(&h, t).unwrap(), &sum) < 1e-13);
    }
}
