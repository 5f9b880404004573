use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::{attenuated_correlation, fidelity_metric, partial_trace};
use super::phases::{estimate_sector_phases, sector_phases, SectorPhaseTable};
use crate::chain::{build_hamiltonian, propagator, ChainSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, kron, max_abs, CMatrix, CVector, MatrixJson};

/// Overlap a reduced state must reach to be labelled as a Bell state.
pub const BELL_THRESHOLD: f64 = 1.0 - 1e-6;

/// How the untouched sites are prepared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferMode {
    /// Spectators in `|0⟩`, states are kets.
    Pure,
    /// Traceless deviation operators with maximally mixed spectators.
    Deviation,
}

impl FromStr for TransferMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(TransferMode::Pure),
            "deviation" => Ok(TransferMode::Deviation),
            _ => Err(Error::Parse(format!("unknown mode {s:?} (pure | deviation)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellKind {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] =
        [BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus];

    /// Two-qubit ket, first site on the most significant qubit.
    pub fn ket(self) -> CVector {
        let s = FRAC_1_SQRT_2;
        let v = match self {
            BellKind::PhiPlus => [s, 0.0, 0.0, s],
            BellKind::PhiMinus => [s, 0.0, 0.0, -s],
            BellKind::PsiPlus => [0.0, s, s, 0.0],
            BellKind::PsiMinus => [0.0, s, -s, 0.0],
        };
        CVector::from_iterator(4, v.iter().map(|&x| c(x, 0.0)))
    }

    pub fn projector(self) -> CMatrix {
        let k = self.ket();
        &k * k.adjoint()
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        })
    }
}

impl FromStr for BellKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BellKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown Bell state {s:?} (phi+|phi-|psi+|psi-)")))
    }
}

/// What is loaded onto the source site of a single-site transfer.
#[derive(Debug, Clone, PartialEq)]
pub enum SiteInput {
    Ket(CVector),
    Deviation(CMatrix),
}

impl SiteInput {
    pub fn mode(&self) -> TransferMode {
        match self {
            SiteInput::Ket(_) => TransferMode::Pure,
            SiteInput::Deviation(_) => TransferMode::Deviation,
        }
    }

    fn operator(&self) -> Result<CMatrix> {
        match self {
            SiteInput::Ket(v) => {
                if v.len() != 2 || (v.norm() - 1.0).abs() > 1e-10 {
                    return Err(Error::Validation("site ket must be a unit 2-vector".into()));
                }
                Ok(v * v.adjoint())
            }
            SiteInput::Deviation(m) => {
                if m.shape() != (2, 2) {
                    return Err(Error::Dimension("site deviation must be 2x2".into()));
                }
                Ok(m.clone())
            }
        }
    }
}

/// The six `±X, ±Y, ±Z` eigenstates, labelled.
pub fn six_state_design() -> Vec<(&'static str, CVector)> {
    let s = FRAC_1_SQRT_2;
    let ket = |a: (f64, f64), b: (f64, f64)| CVector::from_vec(vec![c(a.0, a.1), c(b.0, b.1)]);
    vec![
        ("+z", ket((1.0, 0.0), (0.0, 0.0))),
        ("-z", ket((0.0, 0.0), (1.0, 0.0))),
        ("+x", ket((s, 0.0), (s, 0.0))),
        ("-x", ket((s, 0.0), (-s, 0.0))),
        ("+y", ket((s, 0.0), (0.0, s))),
        ("-y", ket((s, 0.0), (0.0, -s))),
    ]
}

/// Outcome of a transfer experiment. Metrics compare the evolved register
/// with the ideal sector-phased mirror image of the input.
#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub n: usize,
    pub time: f64,
    pub mode: TransferMode,
    pub source_sites: Vec<usize>,
    pub destination_sites: Vec<usize>,
    pub fidelity: f64,
    pub attenuated_correlation: f64,
    /// `F` between the ideal and actual reduced states on the destination
    /// (absent when the ideal reduced state vanishes, as for anti-phase
    /// deviation transfer).
    pub reduced_fidelity: Option<f64>,
    pub input_reduced: MatrixJson,
    pub output_reduced: MatrixJson,
    pub expected_reduced: MatrixJson,
    pub bell_input: Option<BellKind>,
    pub bell_output: Option<BellKind>,
    pub bell_overlap: Option<f64>,
    /// Largest entry of the output traced onto the non-destination sites
    /// (deviation mode: zero means those sites are maximally mixed).
    pub spectator_deviation: Option<f64>,
    /// Whether the propagator is an exact sector-phased mirror map.
    pub exact_mirror: bool,
    pub sector_phases: SectorPhaseTable,
    #[serde(skip)]
    pub output_full: CMatrix,
}

/// Propagator and register description shared by transfer experiments.
#[derive(Debug, Clone)]
pub struct TransferSetup {
    spec: ChainSpec,
    time: f64,
    u: CMatrix,
    phases: SectorPhaseTable,
    exact: bool,
}

impl TransferSetup {
    pub fn new(spec: ChainSpec, time: f64) -> Result<TransferSetup> {
        let u = propagator(&build_hamiltonian(&spec)?, time)?;
        let (phases, exact) = match sector_phases(&u) {
            Ok(p) => (p, true),
            Err(_) => (estimate_sector_phases(&u)?, false),
        };
        Ok(TransferSetup { spec, time, u, phases, exact })
    }

    /// Engineered chain at `τ = π/2`.
    pub fn engineered(n: usize) -> Result<TransferSetup> {
        TransferSetup::new(ChainSpec::engineered(n)?, PI / 2.0)
    }

    pub fn propagator(&self) -> &CMatrix {
        &self.u
    }

    pub fn sector_phases(&self) -> &SectorPhaseTable {
        &self.phases
    }

    fn n(&self) -> usize {
        self.spec.n_sites()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n() {
            return Err(Error::Domain(format!("site {site} outside 1..={}", self.n())));
        }
        Ok(())
    }

    /// `op` on `sites` (ascending, op ordered the same way), `fill` elsewhere.
    fn embed(&self, sites: &[usize], op: &CMatrix, fill: &CMatrix) -> CMatrix {
        // build in the order (sites…, rest…) then permute into place
        let n = self.n();
        let rest: Vec<usize> = (1..=n).filter(|s| !sites.contains(s)).collect();
        let mut m = op.clone();
        for _ in &rest {
            m = kron(&m, fill);
        }
        let order: Vec<usize> = sites.iter().chain(&rest).copied().collect();
        permute_sites(&m, &order)
    }

    fn run(
        &self,
        sources: Vec<usize>,
        op: &CMatrix,
        mode: TransferMode,
    ) -> Result<(TransferReport, CMatrix)> {
        let n = self.n();
        let fill = match mode {
            TransferMode::Pure => CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            TransferMode::Deviation => CMatrix::identity(2, 2),
        };
        let rho = self.embed(&sources, op, &fill);
        let out = &self.u * &rho * self.u.adjoint();
        let m = self.phases.mirror_operator();
        let ideal = &m * &rho * m.adjoint();
        let mut dest: Vec<usize> = sources.iter().map(|&s| n + 1 - s).collect();
        dest.sort_unstable();
        let output_reduced = partial_trace(&out, &dest)?;
        let expected_reduced = partial_trace(&ideal, &dest)?;
        let reduced_fidelity = fidelity_metric(&expected_reduced, &output_reduced).ok();
        let spectators: Vec<usize> = (1..=n).filter(|s| !dest.contains(s)).collect();
        let spectator_deviation = match mode {
            TransferMode::Deviation => Some(max_abs(&partial_trace(&out, &spectators)?)),
            TransferMode::Pure => None,
        };
        let report = TransferReport {
            n,
            time: self.time,
            mode,
            source_sites: sources.clone(),
            destination_sites: dest,
            fidelity: fidelity_metric(&ideal, &out)?,
            attenuated_correlation: attenuated_correlation(&ideal, &out)?,
            reduced_fidelity,
            input_reduced: MatrixJson::from(op),
            output_reduced: MatrixJson::from(&output_reduced),
            expected_reduced: MatrixJson::from(&expected_reduced),
            bell_input: None,
            bell_output: None,
            bell_overlap: None,
            spectator_deviation,
            exact_mirror: self.exact,
            sector_phases: self.phases.clone(),
            output_full: out,
        };
        Ok((report, output_reduced))
    }

    /// Loads `input` on `site`, evolves, and reads out the mirror site.
    pub fn single(&self, site: usize, input: &SiteInput) -> Result<TransferReport> {
        self.check_site(site)?;
        let op = input.operator()?;
        Ok(self.run(vec![site], &op, input.mode())?.0)
    }

    /// Loads a Bell state on `(a, b)` and classifies what arrives on the mirror pair.
    pub fn entangled(
        &self,
        pair: (usize, usize),
        kind: BellKind,
        mode: TransferMode,
    ) -> Result<TransferReport> {
        let (a, b) = pair;
        self.check_site(a)?;
        self.check_site(b)?;
        if a == b {
            return Err(Error::Validation("Bell pair needs two distinct sites".into()));
        }
        let projector = kind.projector();
        let op = match mode {
            TransferMode::Pure => projector,
            TransferMode::Deviation => projector - CMatrix::identity(4, 4) * c(0.25, 0.0),
        };
        // Bell states are swap-symmetric as density matrices, so ascending order is safe
        let sources = vec![a.min(b), a.max(b)];
        let (mut report, reduced) = self.run(sources, &op, mode)?;
        let density = match mode {
            TransferMode::Pure => reduced,
            TransferMode::Deviation => {
                let scale = (1usize << (self.n() - 2)) as f64;
                reduced / c(scale, 0.0) + CMatrix::identity(4, 4) * c(0.25, 0.0)
            }
        };
        let (best, overlap) = classify_bell(&density);
        report.bell_input = Some(kind);
        report.bell_overlap = Some(overlap);
        report.bell_output = (overlap >= BELL_THRESHOLD).then_some(best);
        Ok(report)
    }
}

/// Most likely Bell state of a two-qubit density matrix and its overlap.
pub fn classify_bell(rho: &CMatrix) -> (BellKind, f64) {
    BellKind::ALL
        .into_iter()
        .map(|k| {
            let v = k.ket();
            (k, (v.adjoint() * rho * &v)[(0, 0)].re)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("four candidates")
}

/// Reorders qubits: `m` is laid out with its `k`-th qubit (from the most
/// significant) holding site `order[k]`; the result uses site order 1…N.
fn permute_sites(m: &CMatrix, order: &[usize]) -> CMatrix {
    let n = order.len();
    let d = 1usize << n;
    let map = |idx: usize| -> usize {
        let mut out = 0;
        for (k, &site) in order.iter().enumerate() {
            if idx & (1 << (n - 1 - k)) != 0 {
                out |= 1 << (n - site);
            }
        }
        out
    };
    let perm: Vec<usize> = (0..d).map(map).collect();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    out
}

/// Single-site transfer on the engineered chain at `τ = π/2`.
pub fn transfer_single(n: usize, site: usize, input: &SiteInput) -> Result<TransferReport> {
    TransferSetup::engineered(n)?.single(site, input)
}

/// Bell-pair transfer on the engineered chain at `τ = π/2`.
pub fn transfer_entangled(
    n: usize,
    pair: (usize, usize),
    kind: BellKind,
    mode: TransferMode,
) -> Result<TransferReport> {
    TransferSetup::engineered(n)?.entangled(pair, kind, mode)
}
