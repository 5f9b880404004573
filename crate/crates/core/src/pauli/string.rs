use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{check_dense_qubits, CMatrix, I, ONE, ZERO};

/// Longest word the bit-packed representation supports.
pub const MAX_SITES: usize = 32;

/// A single-site Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(ch: char) -> Option<Letter> {
        match ch {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// Fourth root of unity, stored as the exponent of `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn conj(self) -> Phase {
        Phase((4 - self.0) % 4)
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

impl FromStr for Phase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Phase> {
        match s {
            "+1" | "1" => Ok(Phase::ONE),
            "-1" => Ok(Phase::MINUS_ONE),
            "+i" | "i" => Ok(Phase::I),
            "-i" => Ok(Phase::MINUS_I),
            _ => Err(Error::Parse(format!("bad phase {s:?}"))),
        }
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Phase, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An `n`-site Pauli word without phase.
///
/// Site 1 maps to the most significant bit of the computational-basis
/// index; the X and Z parts are kept as bit masks in that same layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> PauliString {
        PauliString { n, x: 0, z: 0 }
    }

    /// Build from raw masks (bit `n − s` holds site `s`).
    pub fn from_masks(n: usize, x: u64, z: u64) -> Result<PauliString> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::Dimension(format!("word length {n} outside 1..={MAX_SITES}")));
        }
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::Dimension(format!("mask bits beyond {n} sites")));
        }
        Ok(PauliString { n, x, z })
    }

    pub fn from_letters(letters: &[Letter]) -> Result<PauliString> {
        let n = letters.len();
        let mut p = PauliString::from_masks(n, 0, 0)?;
        for (k, l) in letters.iter().enumerate() {
            p = p.with_letter(k + 1, *l);
        }
        Ok(p)
    }

    /// A word acting with `letter` on the given 1-based sites and identity elsewhere.
    pub fn on_sites(n: usize, sites: &[(usize, Letter)]) -> Result<PauliString> {
        let mut p = PauliString::from_masks(n, 0, 0)?;
        for &(s, l) in sites {
            if s == 0 || s > n {
                return Err(Error::Domain(format!("site {s} outside 1..={n}")));
            }
            p = p.with_letter(s, l);
        }
        Ok(p)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    fn bit(&self, site: usize) -> u64 {
        1u64 << (self.n - site)
    }

    /// Letter on a 1-based site.
    pub fn letter(&self, site: usize) -> Letter {
        let b = self.bit(site);
        Letter::from_bits(self.x & b != 0, self.z & b != 0)
    }

    pub fn with_letter(mut self, site: usize, letter: Letter) -> PauliString {
        let b = self.bit(site);
        let (x, z) = letter.bits();
        self.x = if x { self.x | b } else { self.x & !b };
        self.z = if z { self.z | b } else { self.z & !b };
        self
    }

    pub fn letters(&self) -> Vec<Letter> {
        (1..=self.n).map(|s| self.letter(s)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Number of `Y` letters; the matrix of the word carries `i^{#Y}`.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    fn check_same_len(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "word lengths differ: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// Number of sites on which the two words anticommute.
    pub fn anticommuting_sites(&self, other: &PauliString) -> u32 {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.anticommuting_sites(other).is_multiple_of(2)
    }

    /// Phase-free site-wise product.
    pub fn word_product(&self, other: &PauliString) -> PauliString {
        PauliString { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z }
    }

    /// Packed `(x, z)` key, useful for F2 linear algebra on words.
    pub(crate) fn packed(&self) -> u64 {
        (self.x << 32) | self.z
    }

    /// `P|j⟩ = amplitude · |j ⊕ x⟩`; returns the amplitude.
    pub(crate) fn column_amplitude(&self, j: usize) -> Complex64 {
        let sign = if ((j as u64) & self.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        Phase::from_power(self.y_count()).to_complex() * sign
    }

    /// Dense `2^n × 2^n` matrix of the bare word.
    pub fn matrix(&self) -> Result<CMatrix> {
        PhasedPauli::new(Phase::ONE, *self).matrix()
    }
}

impl Ord for PauliString {
    /// Canonical order: site 1 first, `I < X < Y < Z` per site; shorter words first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            for s in 1..=self.n {
                match self.letter(s).cmp(&other.letter(s)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in 1..=self.n {
            write!(f, "{}", self.letter(s).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<PauliString> {
        let letters = s
            .chars()
            .map(|ch| {
                Letter::from_char(ch.to_ascii_uppercase())
                    .ok_or_else(|| Error::Parse(format!("bad Pauli letter {ch:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_letters(&letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<PauliString, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A Pauli word with a fourth-root-of-unity prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub word: PauliString,
}

impl PhasedPauli {
    pub fn new(phase: Phase, word: PauliString) -> PhasedPauli {
        PhasedPauli { phase, word }
    }

    pub fn matrix(&self) -> Result<CMatrix> {
        pauli_matrix(self)
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.phase, self.word)
    }
}

/// Product `a·b` with its exact phase.
pub fn pauli_mul(a: &PauliString, b: &PauliString) -> Result<PhasedPauli> {
    a.check_same_len(b)?;
    let word = a.word_product(b);
    // P = i^{x·z} X^x Z^z per site; moving Z^{z_a} past X^{x_b} costs (−1)^{z_a x_b}.
    let k = (a.x & a.z).count_ones() + (b.x & b.z).count_ones() + 2 * (a.z & b.x).count_ones()
        + 4
        - ((word.x & word.z).count_ones() % 4);
    Ok(PhasedPauli::new(Phase::from_power(k), word))
}

/// Dense matrix of `phase × ⊗ σ`, site 1 on the most significant qubit.
pub fn pauli_matrix(p: &PhasedPauli) -> Result<CMatrix> {
    let n = p.word.n_sites();
    check_dense_qubits(n)?;
    let d = 1usize << n;
    let mut m = CMatrix::from_element(d, d, ZERO);
    let pre = p.phase.to_complex();
    let x = p.word.x_mask() as usize;
    for j in 0..d {
        m[(j ^ x, j)] = pre * p.word.column_amplitude(j);
    }
    Ok(m)
}

/// `U · P` for a bare word `P`, computed as a signed column permutation.
pub fn right_multiply(u: &CMatrix, p: &PauliString) -> CMatrix {
    let d = u.ncols();
    let x = p.x_mask() as usize;
    let mut out = CMatrix::from_element(u.nrows(), d, ZERO);
    for k in 0..d {
        let src = k ^ x;
        let amp = p.column_amplitude(k);
        // (U P)_{·k} = U_{·, k⊕x} · P_{k⊕x, k}
        out.column_mut(k).copy_from(&(u.column(src) * amp));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs_diff, trace, unitarity_error};

    fn w(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_site_products() {
        assert_eq!(pauli_mul(&w("XI"), &w("YI")).unwrap(), PhasedPauli::new(Phase::I, w("ZI")));
        assert_eq!(pauli_mul(&w("II"), &w("ZZ")).unwrap(), PhasedPauli::new(Phase::ONE, w("ZZ")));
        assert_eq!(pauli_mul(&w("XZ"), &w("XZ")).unwrap(), PhasedPauli::new(Phase::ONE, w("II")));
        assert_eq!(pauli_mul(&w("Y"), &w("X")).unwrap(), PhasedPauli::new(Phase::MINUS_I, w("Z")));
        assert_eq!(pauli_mul(&w("Z"), &w("X")).unwrap(), PhasedPauli::new(Phase::I, w("Y")));
    }

    #[test]
    fn length_mismatch_is_dimension_error() {
        assert!(matches!(pauli_mul(&w("X"), &w("XX")), Err(Error::Dimension(_))));
    }

    #[test]
    fn z_is_diag_plus_minus() {
        let m = w("Z").matrix().unwrap();
        assert_eq!(m[(0, 0)], ONE);
        assert_eq!(m[(1, 1)], -ONE);
        assert_eq!(m[(0, 1)], ZERO);
    }

    #[test]
    fn identity_word_is_identity_matrix() {
        let m = w("IIII").matrix().unwrap();
        assert_eq!(m, CMatrix::identity(16, 16));
    }

    #[test]
    fn phased_xx_is_unitary_and_traceless() {
        let m = pauli_matrix(&PhasedPauli::new(Phase::I, w("XX"))).unwrap();
        assert!(unitarity_error(&m) < 1e-15);
        assert_eq!(trace(&m), ZERO);
        assert_eq!(m[(3, 0)], I);
    }

    #[test]
    fn site_one_is_most_significant() {
        // X on site 1 of 2 flips the high bit: |00> -> |10> (index 2)
        let m = w("XI").matrix().unwrap();
        assert_eq!(m[(2, 0)], ONE);
        let y = w("Y").matrix().unwrap();
        assert_eq!(y[(1, 0)], c(0.0, 1.0));
        assert_eq!(y[(0, 1)], c(0.0, -1.0));
    }

    #[test]
    fn right_multiply_matches_dense_product() {
        let u = CMatrix::from_fn(8, 8, |i, j| c((i * 3 + j) as f64, (i as f64) - (j as f64)));
        for s in ["XYZ", "IZY", "YYI", "III"] {
            let p = w(s);
            let dense = &u * p.matrix().unwrap();
            assert!(max_abs_diff(&dense, &right_multiply(&u, &p)) < 1e-12, "{s}");
        }
    }

    #[test]
    fn text_and_json_encoding() {
        let p = w("XZZY");
        assert_eq!(p.to_string(), "XZZY");
        assert_eq!(p.letter(1), Letter::X);
        assert_eq!(p.letter(4), Letter::Y);
        let pp = PhasedPauli::new(Phase::MINUS_I, p);
        let js = serde_json::to_string(&pp).unwrap();
        assert_eq!(js, r#"{"phase":"-i","word":"XZZY"}"#);
        assert_eq!(serde_json::from_str::<PhasedPauli>(&js).unwrap(), pp);
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn canonical_order() {
        let mut v = [w("ZI"), w("IX"), w("XY"), w("II"), w("YZ")];
        v.sort();
        let s: Vec<String> = v.iter().map(|p| p.to_string()).collect();
        assert_eq!(s, ["II", "IX", "XY", "YZ", "ZI"]);
    }

    #[test]
    fn oversize_matrix_is_resource_error() {
        let p = PauliString::identity(13);
        assert!(matches!(p.matrix(), Err(Error::Resource(_))));
    }
}
