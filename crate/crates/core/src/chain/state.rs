use crate::error::{Error, Result};
use crate::linalg::{
    c, check_dense_qubits, hermiticity_error, qubits_for_dim, trace, CMatrix, CVector,
    HERMITICITY_TOLERANCE,
};

const NORM_TOLERANCE: f64 = 1e-10;

/// A register state: a ket, a density matrix, or a traceless NMR deviation
/// operator (which evolves like a density matrix but is not positive).
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(CVector),
    Mixed(CMatrix),
    Deviation(CMatrix),
}

impl QuantumState {
    pub fn pure(psi: CVector) -> Result<QuantumState> {
        qubits_for_dim(psi.len())?;
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!("state norm {norm}")));
        }
        Ok(QuantumState::Pure(psi))
    }

    pub fn mixed(rho: CMatrix) -> Result<QuantumState> {
        check_operator(&rho)?;
        let tr = trace(&rho);
        if (tr.re - 1.0).abs() > NORM_TOLERANCE || tr.im.abs() > NORM_TOLERANCE {
            return Err(Error::Validation(format!("density matrix trace {tr}")));
        }
        Ok(QuantumState::Mixed(rho))
    }

    pub fn deviation(rho: CMatrix) -> Result<QuantumState> {
        check_operator(&rho)?;
        Ok(QuantumState::Deviation(rho))
    }

    /// Computational basis state `|b_1 … b_N⟩`, site 1 the most significant bit.
    pub fn basis(n: usize, bits: usize) -> Result<QuantumState> {
        check_dense_qubits(n)?;
        let d = 1usize << n;
        if bits >= d {
            return Err(Error::Domain(format!("basis index {bits} out of range for {n} qubits")));
        }
        let mut psi = CVector::zeros(d);
        psi[bits] = c(1.0, 0.0);
        Ok(QuantumState::Pure(psi))
    }

    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(v) => v.len(),
            QuantumState::Mixed(m) | QuantumState::Deviation(m) => m.nrows(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// `|ψ⟩⟨ψ|` for kets, the matrix itself otherwise.
    pub fn density_matrix(&self) -> CMatrix {
        match self {
            QuantumState::Pure(v) => v * v.adjoint(),
            QuantumState::Mixed(m) | QuantumState::Deviation(m) => m.clone(),
        }
    }
}

fn check_operator(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{}x{} operator", m.nrows(), m.ncols())));
    }
    qubits_for_dim(m.nrows())?;
    let err = hermiticity_error(m);
    if err > HERMITICITY_TOLERANCE {
        return Err(Error::Validation(format!("operator is not Hermitian (error {err:e})")));
    }
    Ok(())
}
