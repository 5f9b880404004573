use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{qubits_for_dim, CMatrix, ZERO};
use crate::pauli::{for_each_pauli_coefficient, pauli_mul, PauliGroup, PauliString, SUPPORT_TOLERANCE};

/// Coefficients `Tr(U P†)/2^n` of a unitary on a set of Pauli words.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTable {
    n: usize,
    coeffs: HashMap<PauliString, Complex64>,
}

impl ExpansionTable {
    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// Coefficient of `p`, zero when `p` is not tabulated.
    pub fn get(&self, p: &PauliString) -> Complex64 {
        self.coeffs.get(p).copied().unwrap_or(ZERO)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Entries in canonical word order.
    pub fn entries(&self) -> Vec<(PauliString, Complex64)> {
        let mut v: Vec<_> = self.coeffs.iter().map(|(p, c)| (*p, *c)).collect();
        v.sort_by_key(|a| a.0);
        v
    }

    /// Entries with modulus above the support tolerance.
    pub fn nonzero(&self) -> Vec<(PauliString, Complex64)> {
        self.entries().into_iter().filter(|(_, c)| c.norm() > SUPPORT_TOLERANCE).collect()
    }

    /// `Σ |c_P|²` over the words of `g`.
    pub fn norm_on(&self, g: &PauliGroup) -> f64 {
        g.iter().map(|p| self.get(p).norm_sqr()).sum()
    }

    /// `Σ |c_P|²` over every tabulated word.
    pub fn total_weight(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub(crate) fn from_map(n: usize, coeffs: HashMap<PauliString, Complex64>) -> ExpansionTable {
        ExpansionTable { n, coeffs }
    }

    pub(crate) fn map(&self) -> &HashMap<PauliString, Complex64> {
        &self.coeffs
    }
}

#[derive(Serialize)]
struct EntryJson {
    word: PauliString,
    coefficient: [f64; 2],
}

impl Serialize for ExpansionTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<EntryJson> = self
            .entries()
            .into_iter()
            .map(|(word, c)| EntryJson { word, coefficient: [c.re, c.im] })
            .collect();
        entries.serialize(s)
    }
}

/// `Tr(U P†)/2^n` for one word, in `O(2^n)`.
pub fn coefficient(u: &CMatrix, p: &PauliString) -> Complex64 {
    let d = u.nrows();
    let x = p.x_mask() as usize;
    let mut acc = ZERO;
    // Tr(U P†) = Σ_k U[k⊕x, k] · conj(P[k⊕x, k])
    for k in 0..d {
        acc += u[(k ^ x, k)] * p.column_amplitude(k).conj();
    }
    acc / d as f64
}

fn check_square(u: &CMatrix, n: usize) -> Result<()> {
    let d = u.nrows();
    if u.ncols() != d || qubits_for_dim(d)? != n {
        return Err(Error::Dimension(format!(
            "{}x{} matrix against {n}-site words",
            u.nrows(),
            u.ncols()
        )));
    }
    Ok(())
}

/// Expansion coefficients of `u` on every element of `g`.
pub fn expand(u: &CMatrix, g: &PauliGroup) -> Result<ExpansionTable> {
    check_square(u, g.n_sites())?;
    let coeffs = g.iter().map(|p| (*p, coefficient(u, p))).collect();
    Ok(ExpansionTable { n: g.n_sites(), coeffs })
}

/// Expansion over the full `4^n` basis, keeping entries above the support
/// tolerance.
pub fn expand_full(u: &CMatrix) -> Result<ExpansionTable> {
    let n = qubits_for_dim(u.nrows())?;
    let mut coeffs = HashMap::new();
    for_each_pauli_coefficient(u, |p, c| {
        if c.norm() > SUPPORT_TOLERANCE {
            coeffs.insert(p, c);
        }
    })?;
    Ok(ExpansionTable { n, coeffs })
}

/// `N_G(U) = Σ_{P∈G} |Tr(U P†)/2^n|²`.
pub fn norm(u: &CMatrix, g: &PauliGroup) -> Result<f64> {
    Ok(expand(u, g)?.norm_on(g))
}

/// The quantities that fix `norm(U·exp(iθD), child)` as a function of `θ`:
/// `mean + delta·cos 2θ + w·sin 2θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleProfile {
    /// Current weight on the child group.
    pub norm: f64,
    /// Weight on the coset `D·child`.
    pub coset_norm: f64,
    pub delta: f64,
    pub w: f64,
}

impl AngleProfile {
    pub fn norm_at(&self, theta: f64) -> f64 {
        0.5 * (self.norm + self.coset_norm)
            + self.delta * (2.0 * theta).cos()
            + self.w * (2.0 * theta).sin()
    }

    /// Best achievable weight on the child over all angles.
    pub fn best_norm(&self) -> f64 {
        0.5 * (self.norm + self.coset_norm) + self.delta.hypot(self.w)
    }
}

/// Evaluates the profile from a coefficient table covering `child ∪ D·child`.
pub(crate) fn profile_from_table(
    table: &ExpansionTable,
    d: &PauliString,
    child: &PauliGroup,
) -> AngleProfile {
    let mut norm = 0.0;
    let mut coset_norm = 0.0;
    let mut w = 0.0;
    for r in child.iter() {
        let cr = table.get(r);
        // r·D = ω Q
        let prod = pauli_mul(r, d).expect("words share a length");
        let cq = table.get(&prod.word);
        norm += cr.norm_sqr();
        coset_norm += cq.norm_sqr();
        w += (cr * prod.phase.to_complex() * cq.conj()).im;
    }
    AngleProfile { norm, coset_norm, delta: 0.5 * (norm - coset_norm), w }
}

fn check_candidate(d: &PauliString, child: &PauliGroup) -> Result<()> {
    if d.n_sites() != child.n_sites() {
        return Err(Error::Dimension("word and group lengths differ".into()));
    }
    if child.contains(d) {
        return Err(Error::Precondition(format!("{d} already lies in the target subgroup")));
    }
    Ok(())
}

fn table_for(u: &CMatrix, d: &PauliString, child: &PauliGroup) -> Result<ExpansionTable> {
    check_square(u, child.n_sites())?;
    let mut coeffs = HashMap::new();
    for r in child.iter() {
        coeffs.insert(*r, coefficient(u, r));
        let q = r.word_product(d);
        coeffs.insert(q, coefficient(u, &q));
    }
    Ok(ExpansionTable { n: child.n_sites(), coeffs })
}

/// `Im Σ_r c(D̃_r) · conj(Tr(U D† D̃_r†)/2^n)` over `D̃_r ∈ child`.
pub fn w_value(u: &CMatrix, d: &PauliString, child: &PauliGroup) -> Result<f64> {
    angle_profile(u, d, child).map(|p| p.w)
}

pub fn angle_profile(u: &CMatrix, d: &PauliString, child: &PauliGroup) -> Result<AngleProfile> {
    check_candidate(d, child)?;
    Ok(profile_from_table(&table_for(u, d, child)?, d, child))
}

/// Maximiser in `(−π/2, π/2]` of the profile; `None` when it is flat.
pub fn best_angle(profile: &AngleProfile, stall_tolerance: f64) -> Option<f64> {
    if profile.w.abs() <= stall_tolerance && profile.delta.abs() <= stall_tolerance {
        return None;
    }
    let theta = 0.5 * profile.w.atan2(profile.delta);
    // ½·atan2 already lands on the maximum; the other stationary point is
    // compared explicitly so the branch choice never rests on that identity
    let other = if theta > 0.0 { theta - std::f64::consts::FRAC_PI_2 } else { theta + std::f64::consts::FRAC_PI_2 };
    let (a, b) = (profile.norm_at(theta), profile.norm_at(other));
    if b > a + 1e-15 || ((b - a).abs() <= 1e-15 && other.abs() < theta.abs()) {
        Some(other)
    } else {
        Some(theta)
    }
}

/// The `θ` maximising `norm(U·exp(iθD), child)`.
pub fn optimal_angle(u: &CMatrix, d: &PauliString, child: &PauliGroup) -> Result<f64> {
    let profile = angle_profile(u, d, child)?;
    best_angle(&profile, super::STALL_TOLERANCE)
        .ok_or(Error::Stall { w: profile.w, delta: profile.delta })
}
