use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::string::{PauliString, Phase};
use crate::error::{Error, Result};
use crate::linalg::{qubits_for_dim, unitarity_error, CMatrix, UNITARITY_TOLERANCE};

/// Relative threshold on `|Tr(U P†)| / 2^n` for a word to count as support.
pub const SUPPORT_TOLERANCE: f64 = 1e-10;

/// A phase-free multiplicative group of Pauli words.
///
/// Elements are kept in canonical order, identity first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliGroup {
    n: usize,
    elements: Vec<PauliString>,
    index: HashMap<PauliString, usize>,
}

impl PauliGroup {
    pub fn trivial(n: usize) -> PauliGroup {
        PauliGroup::from_sorted(n, vec![PauliString::identity(n)])
    }

    fn from_sorted(n: usize, elements: Vec<PauliString>) -> PauliGroup {
        let index = elements.iter().enumerate().map(|(k, p)| (*p, k)).collect();
        PauliGroup { n, elements, index }
    }

    fn from_set(n: usize, set: BTreeSet<PauliString>) -> PauliGroup {
        PauliGroup::from_sorted(n, set.into_iter().collect())
    }

    /// Validate that `words` already form a group.
    pub fn new<I: IntoIterator<Item = PauliString>>(n: usize, words: I) -> Result<PauliGroup> {
        let set: BTreeSet<PauliString> = words.into_iter().collect();
        if let Some(p) = set.iter().find(|p| p.n_sites() != n) {
            return Err(Error::Dimension(format!("{p} is not a {n}-site word")));
        }
        if !set.contains(&PauliString::identity(n)) {
            return Err(Error::Validation("group must contain the identity".into()));
        }
        for a in &set {
            for b in &set {
                if !set.contains(&a.word_product(b)) {
                    return Err(Error::Validation(format!("not closed: {a}·{b} missing")));
                }
            }
        }
        Ok(PauliGroup::from_set(n, set))
    }

    /// Parse a list of words and validate closure.
    pub fn from_words(words: &[&str]) -> Result<PauliGroup> {
        let parsed = words.iter().map(|s| s.parse()).collect::<Result<Vec<PauliString>>>()?;
        let n = parsed
            .first()
            .map(PauliString::n_sites)
            .ok_or_else(|| Error::Validation("empty word list".into()))?;
        PauliGroup::new(n, parsed)
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `log2 |G|`.
    pub fn rank(&self) -> usize {
        self.elements.len().trailing_zeros() as usize
    }

    pub fn elements(&self) -> &[PauliString] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = &PauliString> {
        self.elements.iter()
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.index.contains_key(p)
    }

    pub fn index_of(&self, p: &PauliString) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn is_subgroup_of(&self, other: &PauliGroup) -> bool {
        self.n == other.n && self.elements.iter().all(|p| other.contains(p))
    }

    /// Elements of `self` not in `sub`, in canonical order.
    pub fn difference(&self, sub: &PauliGroup) -> Vec<PauliString> {
        self.elements.iter().filter(|p| !sub.contains(p)).copied().collect()
    }

    /// Whether every pair of elements commutes as operators.
    pub fn is_abelian(&self) -> bool {
        let basis = XorBasis::greedy(self.elements.iter().copied());
        basis
            .words
            .iter()
            .all(|a| basis.words.iter().all(|b| a.commutes_with(b)))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.elements.iter().map(ToString::to_string).collect()
    }
}

impl Serialize for PauliGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.elements.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PauliGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let words = Vec::<PauliString>::deserialize(d)?;
        let n = words
            .first()
            .map(PauliString::n_sites)
            .ok_or_else(|| serde::de::Error::custom("empty group"))?;
        PauliGroup::new(n, words).map_err(serde::de::Error::custom)
    }
}

/// Smallest phase-free closure containing `seed` and the identity.
pub fn group_closure(n: usize, seed: &[PauliString]) -> Result<PauliGroup> {
    let mut set = BTreeSet::new();
    set.insert(PauliString::identity(n));
    for s in seed {
        if s.n_sites() != n {
            return Err(Error::Dimension(format!("{s} is not a {n}-site word")));
        }
        if set.contains(s) {
            continue;
        }
        // every element times s joins; the result is again closed
        let products: Vec<PauliString> = set.iter().map(|g| g.word_product(s)).collect();
        set.extend(products);
    }
    Ok(PauliGroup::from_set(n, set))
}

/// Independent generators over F2 (phase-free words form a vector space).
#[derive(Debug, Clone, Default)]
struct XorBasis {
    rows: Vec<u64>,
    words: Vec<PauliString>,
}

impl XorBasis {
    fn greedy<I: IntoIterator<Item = PauliString>>(words: I) -> XorBasis {
        let mut b = XorBasis::default();
        for w in words {
            b.insert(w);
        }
        b
    }

    fn reduce(&self, mut v: u64) -> u64 {
        for &r in &self.rows {
            v = v.min(v ^ r);
        }
        v
    }

    fn contains(&self, p: &PauliString) -> bool {
        self.reduce(p.packed()) == 0
    }

    fn insert(&mut self, p: PauliString) -> bool {
        let v = self.reduce(p.packed());
        if v == 0 {
            return false;
        }
        self.rows.push(v);
        self.rows.sort_unstable_by(|a, b| b.cmp(a));
        self.words.push(p);
        true
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

/// Whether some linear functional vanishes on `basis` and equals 1 on every
/// excluded word, i.e. whether `span(basis)` extends to a hyperplane that
/// avoids `exclude`.
fn hyperplane_feasible(basis: &XorBasis, exclude: &[PauliString]) -> bool {
    // rows are (v, rhs) packed as u128 with rhs in bit 64
    let mut rows: Vec<u128> = Vec::new();
    let mut push = |v: u64, rhs: bool| -> bool {
        let mut r = (v as u128) | ((rhs as u128) << 64);
        for &q in rows.iter() {
            let lead = 63 - ((q as u64).leading_zeros() as u128);
            if (r >> lead) & 1 == 1 {
                r ^= q;
            }
        }
        if r as u64 == 0 {
            return r >> 64 == 0;
        }
        rows.push(r);
        rows.sort_unstable_by(|a, b| (*b as u64).cmp(&(*a as u64)));
        true
    };
    for &v in &basis.rows {
        if !push(v, false) {
            return false;
        }
    }
    exclude.iter().all(|e| push(e.packed(), true))
}

/// A largest proper subgroup of `g` that contains none of `exclude`.
///
/// Candidates are generator subsets of `g` enumerated in canonical
/// lexicographic order; the first one of the largest feasible size wins.
pub fn maximal_subgroup(g: &PauliGroup, exclude: &[PauliString]) -> Result<PauliGroup> {
    if g.is_trivial() {
        return Err(Error::NoProperSubgroup(format!(
            "the trivial {}-site group has no proper subgroup",
            g.n
        )));
    }
    let identity = PauliString::identity(g.n);
    if exclude.contains(&identity) {
        return Err(Error::Validation("the identity cannot be excluded".into()));
    }
    let exclude: Vec<PauliString> = exclude.iter().filter(|p| g.contains(p)).copied().collect();
    let candidates: Vec<PauliString> = g.elements[1..].to_vec();
    let r = g.rank();

    // Hyperplanes first, with exact feasibility pruning so the search never dead-ends.
    let mut basis = XorBasis::default();
    if hyperplane_feasible(&basis, &exclude) {
        for &e in &candidates {
            if basis.len() == r - 1 {
                break;
            }
            if basis.contains(&e) {
                continue;
            }
            let mut next = basis.clone();
            next.insert(e);
            if hyperplane_feasible(&next, &exclude) {
                basis = next;
            }
        }
        debug_assert_eq!(basis.len(), r - 1);
        return group_closure(g.n, &basis.words);
    }

    for dim in (1..r - 1).rev() {
        if let Some(found) = dfs_subgroup(&candidates, &exclude, dim, 0, XorBasis::default()) {
            return group_closure(g.n, &found.words);
        }
    }
    Ok(PauliGroup::trivial(g.n))
}

fn dfs_subgroup(
    candidates: &[PauliString],
    exclude: &[PauliString],
    dim: usize,
    start: usize,
    basis: XorBasis,
) -> Option<XorBasis> {
    if basis.len() == dim {
        return Some(basis);
    }
    for (i, e) in candidates.iter().enumerate().skip(start) {
        if candidates.len() - i < dim - basis.len() {
            break;
        }
        if basis.contains(e) {
            continue;
        }
        let mut next = basis.clone();
        next.insert(*e);
        if exclude.iter().any(|x| next.contains(x)) {
            continue;
        }
        if let Some(found) = dfs_subgroup(candidates, exclude, dim, i + 1, next) {
            return Some(found);
        }
    }
    None
}

fn fwht(v: &mut [Complex64]) {
    let mut h = 1;
    while h < v.len() {
        for block in (0..v.len()).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// All `4^n` expansion coefficients `Tr(U P†)/2^n`, visited as
/// `(word, coefficient)`. One Walsh–Hadamard transform per X-mask.
pub fn for_each_pauli_coefficient<F>(u: &CMatrix, mut visit: F) -> Result<()>
where
    F: FnMut(PauliString, Complex64),
{
    let d = u.nrows();
    let n = qubits_for_dim(d)?;
    if u.ncols() != d {
        return Err(Error::Dimension("matrix is not square".into()));
    }
    let scale = 1.0 / d as f64;
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    for x in 0..d {
        for (j, slot) in v.iter_mut().enumerate() {
            *slot = u[(j, j ^ x)];
        }
        fwht(&mut v);
        for (z, value) in v.iter().enumerate() {
            let word = PauliString::from_masks(n, x as u64, z as u64)?;
            let pre = Phase::from_power(word.y_count()).to_complex();
            visit(word, pre * value * scale);
        }
    }
    Ok(())
}

/// Closure of every word on which `u` has non-negligible weight.
pub fn support_group(u: &CMatrix) -> Result<PauliGroup> {
    let err = unitarity_error(u);
    if err > UNITARITY_TOLERANCE {
        return Err(Error::Validation(format!("input is not unitary (error {err:e})")));
    }
    let n = qubits_for_dim(u.nrows())?;
    let mut support = Vec::new();
    for_each_pauli_coefficient(u, |p, coef| {
        if coef.norm() > SUPPORT_TOLERANCE {
            support.push(p);
        }
    })?;
    group_closure(n, &support)
}

/// A strictly decreasing sequence of groups ending at the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ChainLevels", into = "ChainLevels")]
pub struct SubgroupChain {
    levels: Vec<PauliGroup>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainLevels {
    levels: Vec<PauliGroup>,
}

impl TryFrom<ChainLevels> for SubgroupChain {
    type Error = Error;
    fn try_from(c: ChainLevels) -> Result<SubgroupChain> {
        SubgroupChain::new(c.levels)
    }
}

impl From<SubgroupChain> for ChainLevels {
    fn from(c: SubgroupChain) -> ChainLevels {
        ChainLevels { levels: c.levels }
    }
}

impl SubgroupChain {
    pub fn new(levels: Vec<PauliGroup>) -> Result<SubgroupChain> {
        let last = levels
            .last()
            .ok_or_else(|| Error::Validation("empty subgroup chain".into()))?;
        if !last.is_trivial() {
            return Err(Error::Validation("chain must end at the identity group".into()));
        }
        for pair in levels.windows(2) {
            if !(pair[1].is_subgroup_of(&pair[0]) && pair[1].len() < pair[0].len()) {
                return Err(Error::Validation(format!(
                    "level of size {} is not a strict subgroup of its predecessor (size {})",
                    pair[1].len(),
                    pair[0].len()
                )));
            }
        }
        Ok(SubgroupChain { levels })
    }

    /// Repeated `maximal_subgroup` from `top` down to the identity.
    pub fn automatic(top: PauliGroup) -> Result<SubgroupChain> {
        let mut levels = vec![top];
        while let Some(g) = levels.last().filter(|g| !g.is_trivial()) {
            let next = maximal_subgroup(g, &[])?;
            levels.push(next);
        }
        SubgroupChain::new(levels)
    }

    /// Chain whose `k`-th level is the closure of `order[k..]`, so that each
    /// step leaves exactly the word `order[k-1]` (and its coset) to be peeled.
    pub fn peeling_order(top: PauliGroup, order: &[PauliString]) -> Result<SubgroupChain> {
        let n = top.n_sites();
        let mut levels = vec![top];
        for k in 1..=order.len() {
            levels.push(group_closure(n, &order[k..])?);
        }
        SubgroupChain::new(levels)
    }

    pub fn levels(&self) -> &[PauliGroup] {
        &self.levels
    }

    pub fn top(&self) -> &PauliGroup {
        &self.levels[0]
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cis, ONE, ZERO};

    pub(crate) const MIRROR4_G0: [&str; 16] = [
        "IIII", "IXXI", "IYYI", "IZZI", "XIIX", "YIIY", "ZIIZ", "XXXX", "YYYY", "ZZZZ", "XYYX",
        "YXXY", "XZZX", "ZXXZ", "YZZY", "ZYYZ",
    ];
    const MIRROR4_G1: [&str; 8] = ["IIII", "IXXI", "IYYI", "IZZI", "XXXX", "XYYX", "XZZX", "XIIX"];

    fn words(ws: &[&str]) -> Vec<PauliString> {
        ws.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn closure_of_commuting_generators() {
        let g = group_closure(2, &words(&["IZ", "ZI"])).unwrap();
        assert_eq!(g.to_strings(), ["II", "IZ", "ZI", "ZZ"]);
    }

    #[test]
    fn closure_of_empty_seed_is_identity() {
        let g = group_closure(3, &[]).unwrap();
        assert_eq!(g.to_strings(), ["III"]);
    }

    #[test]
    fn mirror4_g0_is_already_closed() {
        let g = group_closure(4, &words(&MIRROR4_G0)).unwrap();
        assert_eq!(g.len(), 16);
        assert!(words(&MIRROR4_G0).iter().all(|p| g.contains(p)));
        assert!(PauliGroup::from_words(&MIRROR4_G0).is_ok());
        assert!(g.is_abelian());
    }

    #[test]
    fn closure_rejects_mixed_lengths() {
        assert!(matches!(
            group_closure(2, &words(&["IZ", "ZII"])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn new_rejects_unclosed_sets() {
        assert!(PauliGroup::from_words(&["II", "XI", "ZI"]).is_err());
        assert!(PauliGroup::from_words(&["XI"]).is_err());
    }

    #[test]
    fn maximal_subgroup_of_mirror4_g0_is_mirror4_g1() {
        let g0 = PauliGroup::from_words(&MIRROR4_G0).unwrap();
        let g1 = maximal_subgroup(&g0, &[]).unwrap();
        assert_eq!(g1.len(), 8);
        assert_eq!(g1, PauliGroup::from_words(&MIRROR4_G1).unwrap());
    }

    #[test]
    fn maximal_subgroup_small_cases() {
        let g = PauliGroup::from_words(&["II", "ZZ"]).unwrap();
        assert_eq!(maximal_subgroup(&g, &[]).unwrap().to_strings(), ["II"]);
        let g = PauliGroup::from_words(&["II", "IZ", "ZI", "ZZ"]).unwrap();
        assert_eq!(maximal_subgroup(&g, &[]).unwrap().len(), 2);
        let t = PauliGroup::trivial(2);
        assert!(matches!(maximal_subgroup(&t, &[]), Err(Error::NoProperSubgroup(_))));
    }

    #[test]
    fn maximal_subgroup_honours_exclusions() {
        let g = PauliGroup::from_words(&["II", "IZ", "ZI", "ZZ"]).unwrap();
        let h = maximal_subgroup(&g, &words(&["IZ"])).unwrap();
        assert_eq!(h.to_strings(), ["II", "ZI"]);
        // no index-2 subgroup avoids all three non-identity elements
        let h = maximal_subgroup(&g, &words(&["IZ", "ZI", "ZZ"])).unwrap();
        assert_eq!(h.to_strings(), ["II"]);
        // rank 3: excluding a, b and ab forces a subgroup of order 2
        let g = group_closure(3, &words(&["ZII", "IZI", "IIZ"])).unwrap();
        let h = maximal_subgroup(&g, &words(&["ZII", "IZI", "ZZI"])).unwrap();
        assert_eq!(h.len(), 2);
        assert!(h.contains(&"IIZ".parse().unwrap()));
        let g0 = PauliGroup::from_words(&MIRROR4_G0).unwrap();
        let h = maximal_subgroup(&g0, &words(&["YZZY", "IXXI"])).unwrap();
        assert_eq!(h.len(), 8);
        assert!(!h.contains(&"YZZY".parse().unwrap()));
        assert!(!h.contains(&"IXXI".parse().unwrap()));
    }

    #[test]
    fn identity_support() {
        let g = support_group(&CMatrix::identity(8, 8)).unwrap();
        assert_eq!(g.to_strings(), ["III"]);
    }

    #[test]
    fn zz_rotation_support() {
        // exp(−iπ/4 ZZ) = cos(π/4)·1 − i sin(π/4)·ZZ
        let zz: PauliString = "ZZ".parse().unwrap();
        let m = zz.matrix().unwrap();
        let theta = std::f64::consts::FRAC_PI_4;
        let u = CMatrix::identity(4, 4) * c(theta.cos(), 0.0) + m * c(0.0, -theta.sin());
        assert_eq!(support_group(&u).unwrap().to_strings(), ["II", "ZZ"]);
    }

    #[test]
    fn support_rejects_non_unitary() {
        let mut u = CMatrix::identity(2, 2);
        u[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(support_group(&u), Err(Error::Validation(_))));
    }

    #[test]
    fn coefficients_match_direct_traces() {
        let u = CMatrix::from_fn(4, 4, |i, j| cis((i * 4 + j) as f64 * 0.37) * (1.0 + i as f64));
        for_each_pauli_coefficient(&u, |p, coef| {
            let direct = crate::linalg::inner(&p.matrix().unwrap(), &u) / 4.0;
            assert!((direct - coef).norm() < 1e-12, "{p}");
        })
        .unwrap();
        let _ = (ONE, ZERO);
    }

    #[test]
    fn chain_validation() {
        let g = PauliGroup::from_words(&["II", "ZZ"]).unwrap();
        assert!(SubgroupChain::new(vec![g.clone()]).is_err());
        assert!(SubgroupChain::new(vec![g.clone(), g.clone(), PauliGroup::trivial(2)]).is_err());
        let c = SubgroupChain::new(vec![g, PauliGroup::trivial(2)]).unwrap();
        assert_eq!(c.depth(), 1);
    }

    #[test]
    fn automatic_chain_of_mirror4_g0_matches_standard_levels() {
        let g0 = PauliGroup::from_words(&MIRROR4_G0).unwrap();
        let chain = SubgroupChain::automatic(g0).unwrap();
        let sizes: Vec<usize> = chain.levels().iter().map(PauliGroup::len).collect();
        assert_eq!(sizes, [16, 8, 4, 2, 1]);
        assert_eq!(chain.levels()[2].to_strings(), ["IIII", "IXXI", "IYYI", "IZZI"]);
        assert_eq!(chain.levels()[3].to_strings(), ["IIII", "IXXI"]);
    }

    #[test]
    fn chain_json_round_trip() {
        let g0 = PauliGroup::from_words(&MIRROR4_G0).unwrap();
        let chain = SubgroupChain::automatic(g0).unwrap();
        let js = serde_json::to_string(&chain).unwrap();
        let back: SubgroupChain = serde_json::from_str(&js).unwrap();
        assert_eq!(back, chain);
    }
}
