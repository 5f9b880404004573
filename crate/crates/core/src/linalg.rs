//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Hermitian exponentials go
//! through an eigendecomposition, split into the connected blocks of the
//! matrix's sparsity graph so that symmetry sectors are diagonalized
//! independently.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest register handled by dense operators.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Default bound on `‖U†U − 1‖_max`.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

/// Default bound on `‖H − H†‖_max`.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{iφ}`.
pub fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

pub fn check_dense_qubits(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Resource(format!(
            "{n} qubits exceeds the dense-operator cap of {MAX_DENSE_QUBITS}"
        )));
    }
    Ok(())
}

/// Number of qubits for a dimension `2^n`, or an error if `dim` is not a power of two.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("{dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(A† B)` without forming the product.
pub fn inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn hermiticity_error(h: &CMatrix) -> f64 {
    max_abs_diff(h, &h.adjoint())
}

pub fn unitarity_error(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn is_square(m: &CMatrix) -> bool {
    m.nrows() == m.ncols()
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Global-phase-invariant gate overlap `|Tr(U† V)| / d`.
pub fn unitary_fidelity(u: &CMatrix, v: &CMatrix) -> f64 {
    inner(u, v).norm() / u.nrows() as f64
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(h: &CMatrix) -> HermitianEigen {
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = h.nrows();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen {
        values: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors,
    }
}

/// Connected components of the graph whose edges are the nonzero
/// off-diagonal entries of `m`. Components are sorted by smallest index.
pub fn sparsity_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn submatrix(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// `f(H)` for Hermitian `H` and a scalar function applied to its spectrum,
/// computed block by block.
pub fn hermitian_function<F>(h: &CMatrix, f: F) -> CMatrix
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let n = h.nrows();
    let blocks = sparsity_blocks(h);
    let pieces: Vec<CMatrix> = blocks
        .par_iter()
        .map(|idx| {
            let sub = submatrix(h, idx);
            let eig = hermitian_eigen(&sub);
            let k = idx.len();
            let mut scaled = eig.vectors.clone();
            for (col, &lambda) in eig.values.iter().enumerate() {
                let w = f(lambda);
                for row in 0..k {
                    scaled[(row, col)] *= w;
                }
            }
            scaled * eig.vectors.adjoint()
        })
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for (idx, piece) in blocks.iter().zip(pieces) {
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = piece[(a, b)];
            }
        }
    }
    out
}

/// `exp(−i H t)` for Hermitian `H` (not validated here).
pub fn expm_hermitian(h: &CMatrix, t: f64) -> CMatrix {
    hermitian_function(h, |lambda| cis(-lambda * t))
}

/// Row-major `[re, im]` pairs, the matrix layout used by every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<[f64; 2]>>);

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        )
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.0[i][j];
            c(re, im)
        }))
    }
}
