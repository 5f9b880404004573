use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::chain::{excitation_count, reverse_bits};
use crate::error::{Error, Result};
use crate::linalg::{c, qubits_for_dim, CMatrix, ZERO};

/// Agreement required between phases within one excitation sector.
pub const SECTOR_PHASE_TOLERANCE: f64 = 1e-9;

/// Phase acquired by every `k`-excitation basis state, `k = 0 … N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorPhaseTable {
    phases: Vec<Complex64>,
}

impl SectorPhaseTable {
    pub fn n_sites(&self) -> usize {
        self.phases.len() - 1
    }

    pub fn phase(&self, k: usize) -> Complex64 {
        self.phases[k]
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    /// `phase(k) / phase(0)`.
    pub fn relative(&self, k: usize) -> Complex64 {
        self.phases[k] / self.phases[0]
    }

    /// The ideal mirror map `Σ_j φ_{k(j)} |rev j⟩⟨j|`.
    pub fn mirror_operator(&self) -> CMatrix {
        let n = self.n_sites();
        let d = 1usize << n;
        let mut m = CMatrix::from_element(d, d, ZERO);
        for j in 0..d {
            m[(reverse_bits(j, n), j)] = self.phases[excitation_count(j)];
        }
        m
    }
}

#[derive(Serialize)]
struct SectorJson {
    k: usize,
    phase: [f64; 2],
    angle: f64,
}

impl Serialize for SectorPhaseTable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<SectorJson> = self
            .phases
            .iter()
            .enumerate()
            .map(|(k, p)| SectorJson { k, phase: [p.re, p.im], angle: p.arg() })
            .collect();
        rows.serialize(s)
    }
}

/// Checks that `u` sends every basis state to its site reversal times a
/// phase shared by its excitation sector, and tabulates those phases.
pub fn sector_phases(u: &CMatrix) -> Result<SectorPhaseTable> {
    let n = qubits_for_dim(u.nrows())?;
    let d = 1usize << n;
    let mut phases: Vec<Option<Complex64>> = vec![None; n + 1];
    let mut offending = Vec::new();
    for j in 0..d {
        let amp = u[(reverse_bits(j, n), j)];
        let k = excitation_count(j);
        let ok = (amp.norm() - 1.0).abs() <= SECTOR_PHASE_TOLERANCE
            && match phases[k] {
                Some(p) => (amp - p).norm() <= SECTOR_PHASE_TOLERANCE,
                None => {
                    phases[k] = Some(amp);
                    true
                }
            };
        if !ok {
            offending.push(format!("{j:0n$b}"));
        }
    }
    if !offending.is_empty() {
        let shown = offending.iter().take(8).cloned().collect::<Vec<_>>().join(", ");
        return Err(Error::Validation(format!(
            "not a sector-phased mirror map; {} offending basis states (first: {shown})",
            offending.len()
        )));
    }
    Ok(SectorPhaseTable { phases: phases.into_iter().map(|p| p.unwrap_or(c(1.0, 0.0))).collect() })
}

/// Best-fit sector phases for any unitary: the normalised mean of the
/// reversed-image amplitudes in each sector (`1` where that mean vanishes).
pub fn estimate_sector_phases(u: &CMatrix) -> Result<SectorPhaseTable> {
    let n = qubits_for_dim(u.nrows())?;
    let mut sums = vec![ZERO; n + 1];
    for j in 0..1usize << n {
        sums[excitation_count(j)] += u[(reverse_bits(j, n), j)];
    }
    let phases = sums
        .into_iter()
        .map(|s| if s.norm() > 1e-12 { s / s.norm() } else { c(1.0, 0.0) })
        .collect();
    Ok(SectorPhaseTable { phases })
}
