use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, check_dense_qubits, CMatrix};
use crate::pauli::{Letter, PauliString};

/// Fluorine/proton gyromagnetic ratio used by the bundled example systems.
pub const GAMMA_F_OVER_H: f64 = 0.94;

/// Weak-coupling NMR spin system in the rotating frame.
///
/// Spins and channel members are 1-based in files and in this API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawSystem")]
pub struct NmrSystemSpec {
    pub n: usize,
    pub shifts_hz: Vec<f64>,
    /// Effective `J_ij + 2D_ij` couplings; symmetric with zero diagonal.
    pub couplings_hz: Vec<Vec<f64>>,
    /// Spins driven together by each RF channel; the channels partition the spins.
    pub channels: Vec<Vec<usize>>,
    /// Gyromagnetic weight of each channel.
    pub weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n: usize,
    shifts_hz: Vec<f64>,
    couplings_hz: Vec<Vec<f64>>,
    channels: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl TryFrom<RawSystem> for NmrSystemSpec {
    type Error = Error;
    fn try_from(r: RawSystem) -> Result<Self> {
        NmrSystemSpec::new(r.n, r.shifts_hz, r.couplings_hz, r.channels, r.weights)
    }
}

impl NmrSystemSpec {
    pub fn new(
        n: usize,
        shifts_hz: Vec<f64>,
        couplings_hz: Vec<Vec<f64>>,
        channels: Vec<Vec<usize>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("a spin system needs at least one spin".into()));
        }
        check_dense_qubits(n)?;
        if shifts_hz.len() != n {
            return Err(Error::Dimension(format!("{} shifts for {n} spins", shifts_hz.len())));
        }
        if couplings_hz.len() != n || couplings_hz.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("couplings must be {n}x{n}")));
        }
        for i in 0..n {
            if couplings_hz[i][i] != 0.0 {
                return Err(Error::Validation(format!("nonzero self-coupling on spin {}", i + 1)));
            }
            for j in 0..i {
                if (couplings_hz[i][j] - couplings_hz[j][i]).abs() > 1e-12 {
                    return Err(Error::Validation(format!(
                        "coupling matrix not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        if weights.len() != channels.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} channels",
                weights.len(),
                channels.len()
            )));
        }
        let mut seen = vec![false; n];
        for ch in &channels {
            if ch.is_empty() {
                return Err(Error::Validation("empty channel".into()));
            }
            for &s in ch {
                if s == 0 || s > n {
                    return Err(Error::Domain(format!("channel spin {s} outside 1..={n}")));
                }
                if std::mem::replace(&mut seen[s - 1], true) {
                    return Err(Error::Validation(format!("spin {s} is in two channels")));
                }
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("spin {} is in no channel", k + 1)));
        }
        let finite = shifts_hz.iter().chain(couplings_hz.iter().flatten()).chain(&weights);
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite parameter".into()));
        }
        Ok(NmrSystemSpec { n, shifts_hz, couplings_hz, channels, weights })
    }

    /// No drift, one channel per spin, unit weights.
    pub fn free(n: usize) -> Result<Self> {
        NmrSystemSpec::new(
            n,
            vec![0.0; n],
            vec![vec![0.0; n]; n],
            (1..=n).map(|s| vec![s]).collect(),
            vec![1.0; n],
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }
}

fn z_sum(n: usize, sites: &[(usize, f64)]) -> CMatrix {
    let d = 1usize << n;
    CMatrix::from_fn(d, d, |i, j| {
        if i != j {
            return c(0.0, 0.0);
        }
        let v: f64 = sites
            .iter()
            .map(|&(s, w)| if i & (1 << (n - s)) == 0 { w } else { -w })
            .sum();
        c(v, 0.0)
    })
}

/// `−π Σ ν_i Z_i + (π/2) Σ_{i<j} (J_ij + 2D_ij) Z_i Z_j`, diagonal.
pub fn drift_hamiltonian(spec: &NmrSystemSpec) -> CMatrix {
    let n = spec.n;
    let d = spec.dim();
    CMatrix::from_fn(d, d, |i, j| {
        if i != j {
            return c(0.0, 0.0);
        }
        let z = |s: usize| if i & (1 << (n - 1 - s)) == 0 { 1.0 } else { -1.0 };
        let mut v = 0.0;
        for a in 0..n {
            v -= PI * spec.shifts_hz[a] * z(a);
            for b in a + 1..n {
                v += 0.5 * PI * spec.couplings_hz[a][b] * z(a) * z(b);
            }
        }
        c(v, 0.0)
    })
}

/// High-temperature equilibrium deviation `Σ_channels w_c Σ_{i∈c} Z_i`.
pub fn equilibrium_deviation(spec: &NmrSystemSpec) -> CMatrix {
    let sites: Vec<(usize, f64)> = spec
        .channels
        .iter()
        .zip(&spec.weights)
        .flat_map(|(ch, w)| ch.iter().map(move |&s| (s, *w)))
        .collect();
    z_sum(spec.n, &sites)
}

/// `π · w_c · Σ_{i∈c} σ^{x}` and the `σ^{y}` counterpart for each channel:
/// the Hamiltonian per hertz of x- and y-phase amplitude.
pub fn control_operators(spec: &NmrSystemSpec) -> Result<Vec<[CMatrix; 2]>> {
    let n = spec.n;
    let d = spec.dim();
    spec.channels
        .iter()
        .zip(&spec.weights)
        .map(|(ch, w)| {
            let mut ops = [CMatrix::zeros(d, d), CMatrix::zeros(d, d)];
            for (op, letter) in ops.iter_mut().zip([Letter::X, Letter::Y]) {
                for &s in ch {
                    *op += PauliString::on_sites(n, &[(s, letter)])?.matrix()? * c(PI * w, 0.0);
                }
            }
            Ok(ops)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn zero_system_has_zero_drift() {
        assert_eq!(max_abs(&drift_hamiltonian(&NmrSystemSpec::free(3).unwrap())), 0.0);
    }

    #[test]
    fn two_spin_coupling_pattern() {
        let spec = NmrSystemSpec::new(
            2,
            vec![0.0, 0.0],
            vec![vec![0.0, 10.0], vec![10.0, 0.0]],
            vec![vec![1, 2]],
            vec![1.0],
        )
        .unwrap();
        let h = drift_hamiltonian(&spec);
        let q = 0.5 * PI * 10.0;
        let diag: Vec<f64> = (0..4).map(|k| h[(k, k)].re).collect();
        for (got, want) in diag.iter().zip([q, -q, -q, q]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn shifts_enter_with_minus_pi() {
        let spec = NmrSystemSpec::new(1, vec![100.0], vec![vec![0.0]], vec![vec![1]], vec![1.0])
            .unwrap();
        let h = drift_hamiltonian(&spec);
        assert!((h[(0, 0)].re + 100.0 * PI).abs() < 1e-9);
        assert!((h[(1, 1)].re - 100.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn fluorine_proton_equilibrium() {
        let spec = NmrSystemSpec::new(
            5,
            vec![0.0; 5],
            vec![vec![0.0; 5]; 5],
            vec![vec![1, 3, 5], vec![2, 4]],
            vec![GAMMA_F_OVER_H, 1.0],
        )
        .unwrap();
        let rho = equilibrium_deviation(&spec);
        let mut expected = CMatrix::zeros(32, 32);
        for (w, s) in ["ZIIII", "IIZII", "IIIIZ"].iter().map(|s| (GAMMA_F_OVER_H, s))
            .chain(["IZIII", "IIIZI"].iter().map(|s| (1.0, s)))
        {
            expected += s.parse::<PauliString>().unwrap().matrix().unwrap() * c(w, 0.0);
        }
        assert!(max_abs(&(rho - expected)) < 1e-15);
    }

    #[test]
    fn validation() {
        let ok = |ch: Vec<Vec<usize>>, w: Vec<f64>| {
            NmrSystemSpec::new(2, vec![0.0; 2], vec![vec![0.0; 2]; 2], ch, w)
        };
        assert!(ok(vec![vec![1]], vec![1.0]).is_err());
        assert!(ok(vec![vec![1, 2], vec![2]], vec![1.0, 1.0]).is_err());
        assert!(ok(vec![vec![1, 3]], vec![1.0]).is_err());
        assert!(ok(vec![vec![1, 2]], vec![]).is_err());
        assert!(NmrSystemSpec::new(
            2,
            vec![0.0; 2],
            vec![vec![0.0, 1.0], vec![2.0, 0.0]],
            vec![vec![1, 2]],
            vec![1.0]
        )
        .is_err());
        let json = r#"{"n": 1, "shifts_hz": [0], "couplings_hz": [[0]], "channels": [[1]], "weights": [1], "x": 0}"#;
        assert!(NmrSystemSpec::from_json(json).is_err());
        let json = r#"{"n": 1, "shifts_hz": [0], "couplings_hz": [[0]], "channels": [[1]], "weights": [1]}"#;
        assert!(NmrSystemSpec::from_json(json).is_ok());
    }
}
