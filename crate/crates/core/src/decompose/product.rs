use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::peel::rotate_dense;
use crate::error::{Error, Result};
use crate::linalg::{c, check_dense_qubits, CMatrix};
use crate::pauli::PauliString;

/// Tolerance on `|global_phase| = 1`.
const PHASE_MODULUS_TOLERANCE: f64 = 1e-9;

/// One factor `exp(−iθ D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Factor {
    pub word: PauliString,
    pub angle: f64,
}

/// `U = global_phase · exp(−iθ_1 D_1) · exp(−iθ_2 D_2) ⋯ exp(−iθ_m D_m)`,
/// factors listed left to right as they appear in the product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecompositionJson", into = "DecompositionJson")]
pub struct ProductDecomposition {
    n: usize,
    global_phase: Complex64,
    factors: Vec<Factor>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionJson {
    n: usize,
    global_phase: [f64; 2],
    factors: Vec<Factor>,
}

impl TryFrom<DecompositionJson> for ProductDecomposition {
    type Error = Error;
    fn try_from(j: DecompositionJson) -> Result<Self> {
        ProductDecomposition::new(j.n, j.factors, c(j.global_phase[0], j.global_phase[1]))
    }
}

impl From<ProductDecomposition> for DecompositionJson {
    fn from(d: ProductDecomposition) -> Self {
        DecompositionJson {
            n: d.n,
            global_phase: [d.global_phase.re, d.global_phase.im],
            factors: d.factors,
        }
    }
}

impl ProductDecomposition {
    pub fn new(n: usize, factors: Vec<Factor>, global_phase: Complex64) -> Result<Self> {
        if (global_phase.norm() - 1.0).abs() > PHASE_MODULUS_TOLERANCE {
            return Err(Error::Validation(format!(
                "global phase {global_phase} is not unit modulus"
            )));
        }
        for f in &factors {
            if f.word.n_sites() != n {
                return Err(Error::Dimension(format!("factor {} on {n} sites", f.word)));
            }
            if f.word.is_identity() {
                return Err(Error::Validation("identity word in a factor".into()));
            }
            if !f.angle.is_finite() {
                return Err(Error::Validation(format!("non-finite angle on {}", f.word)));
            }
        }
        Ok(ProductDecomposition { n, global_phase, factors })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn global_phase(&self) -> Complex64 {
        self.global_phase
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn words(&self) -> Vec<PauliString> {
        self.factors.iter().map(|f| f.word).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// The dense product `global_phase · Π exp(−iθ_k D_k)` in listed order.
pub fn reconstruct(d: &ProductDecomposition) -> Result<CMatrix> {
    check_dense_qubits(d.n)?;
    let dim = 1usize << d.n;
    let mut u = CMatrix::identity(dim, dim) * d.global_phase;
    for f in &d.factors {
        u = rotate_dense(&u, &f.word, -f.angle);
    }
    Ok(u)
}
