use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::expansion::{best_angle, expand, profile_from_table, AngleProfile, ExpansionTable};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ZERO};
use crate::pauli::{pauli_mul, right_multiply, PauliGroup, PauliString};

/// Knobs of the greedy peeling loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeelConfig {
    /// A level is done once `1 − norm(child)` is at most this.
    pub peel_tolerance: f64,
    /// Greedy steps keep polishing below `peel_tolerance` until this is reached
    /// or no step helps; keeps round trips well inside `1 − 1e−9`.
    pub polish_tolerance: f64,
    /// Gains at or below this count as a stall.
    pub stall_tolerance: f64,
    pub max_steps_per_level: usize,
    /// Angles tried for the first word of the pair search after a stall.
    pub fallback_grid: usize,
}

impl Default for PeelConfig {
    fn default() -> Self {
        PeelConfig {
            peel_tolerance: super::PEEL_TOLERANCE,
            polish_tolerance: 1e-13,
            stall_tolerance: super::STALL_TOLERANCE,
            max_steps_per_level: 64,
            fallback_grid: 24,
        }
    }
}

/// One accepted right-multiplication `U ← U·exp(iθD)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeelStep {
    pub word: PauliString,
    pub angle: f64,
    pub w: f64,
    pub delta: f64,
    pub norm_before: f64,
    pub norm_after: f64,
    /// Set on both steps of a pair found by the grid search; such a pair is
    /// monotone as a unit, not step by step.
    pub fallback: bool,
}

/// Steps taken while descending from one group to the next.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelTrace {
    pub parent_size: usize,
    pub child: PauliGroup,
    pub steps: Vec<PeelStep>,
}

/// Record of a whole decomposition run.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PeelTrace {
    pub levels: Vec<LevelTrace>,
    /// `|Tr(reconstruction† U)|/2^n`, when the dense check was run.
    pub reconstruction_fidelity: Option<f64>,
}

impl PeelTrace {
    /// Greedy steps never lose weight; fallback pairs never lose weight as a pair.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.levels.iter().all(|level| {
            let mut k = 0;
            let steps = &level.steps;
            while k < steps.len() {
                if steps[k].fallback && k + 1 < steps.len() && steps[k + 1].fallback {
                    if steps[k + 1].norm_after < steps[k].norm_before - slack {
                        return false;
                    }
                    k += 2;
                } else {
                    if steps[k].norm_after < steps[k].norm_before - slack {
                        return false;
                    }
                    k += 1;
                }
            }
            true
        })
    }

    pub fn step_count(&self) -> usize {
        self.levels.iter().map(|l| l.steps.len()).sum()
    }
}

/// `U·exp(iθD)` in coefficient space: `c′_Q = cos θ c_Q + i sin θ ω c_{Q⊕D}`
/// where `(Q⊕D)·D = ω Q`.
pub(crate) fn rotate_table(table: &ExpansionTable, d: &PauliString, theta: f64) -> ExpansionTable {
    let (s, co) = theta.sin_cos();
    let mut out = HashMap::with_capacity(table.len());
    for (q, cq) in table.map() {
        let src = q.word_product(d);
        let omega = pauli_mul(&src, d).expect("same length").phase.to_complex();
        let cs = table.get(&src);
        out.insert(*q, cq * co + c(0.0, s) * omega * cs);
        if !table.map().contains_key(&src) && cq != &ZERO {
            // keep the table closed under ⊕D
            let back = pauli_mul(q, d).expect("same length").phase.to_complex();
            out.entry(src).or_insert(c(0.0, s) * back * cq);
        }
    }
    ExpansionTable::from_map(table.n_sites(), out)
}

/// `U·exp(iθD) = cos θ·U + i sin θ·U·D` on a dense matrix.
pub(crate) fn rotate_dense(u: &CMatrix, d: &PauliString, theta: f64) -> CMatrix {
    let (s, co) = theta.sin_cos();
    u * c(co, 0.0) + right_multiply(u, d) * c(0.0, s)
}

struct Candidate {
    word: PauliString,
    profile: AngleProfile,
    angle: f64,
    gain: f64,
}

fn best_single(
    table: &ExpansionTable,
    candidates: &[PauliString],
    child: &PauliGroup,
    stall: f64,
) -> Option<Candidate> {
    let scored: Vec<Option<Candidate>> = candidates
        .par_iter()
        .map(|d| {
            let profile = profile_from_table(table, d, child);
            best_angle(&profile, stall).map(|angle| Candidate {
                word: *d,
                profile,
                angle,
                gain: profile.norm_at(angle) - profile.norm,
            })
        })
        .collect();
    // sequential scan keeps the canonical-order tie break deterministic
    let mut best: Option<Candidate> = None;
    for cand in scored.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| cand.gain > b.gain + 1e-15) {
            best = Some(cand);
        }
    }
    best
}

fn pair_search(
    table: &ExpansionTable,
    candidates: &[PauliString],
    child: &PauliGroup,
    config: &PeelConfig,
) -> Option<(PauliString, f64, Candidate)> {
    let grid: Vec<f64> = (1..config.fallback_grid)
        .map(|k| -PI / 2.0 + PI * k as f64 / config.fallback_grid as f64)
        .filter(|t| t.abs() > 1e-12)
        .collect();
    let start = table.norm_on(child);
    let mut best: Option<(PauliString, f64, Candidate)> = None;
    let mut best_gain = config.stall_tolerance;
    for d1 in candidates {
        for &t1 in &grid {
            let rotated = rotate_table(table, d1, t1);
            if let Some(second) = best_single(&rotated, candidates, child, config.stall_tolerance) {
                let total = second.profile.norm_at(second.angle) - start;
                if total > best_gain {
                    best_gain = total;
                    best = Some((*d1, t1, second));
                }
            }
        }
    }
    best
}

/// Greedy descent from `parent` to `child` on a coefficient table.
pub(crate) fn peel_table(
    mut table: ExpansionTable,
    parent: &PauliGroup,
    child: &PauliGroup,
    config: &PeelConfig,
) -> Result<(ExpansionTable, Vec<PeelStep>)> {
    if !(child.is_subgroup_of(parent) && child.len() < parent.len()) {
        return Err(Error::Precondition("target is not a strict subgroup".into()));
    }
    let covered = table.norm_on(parent);
    if 1.0 - covered > config.peel_tolerance {
        return Err(Error::Precondition(format!(
            "residual has weight {:e} outside the parent group",
            1.0 - covered
        )));
    }
    let candidates = parent.difference(child);
    let mut steps = Vec::new();
    loop {
        let current = table.norm_on(child);
        let missing = 1.0 - current;
        if missing <= config.polish_tolerance {
            break;
        }
        if steps.len() >= config.max_steps_per_level {
            if missing <= config.peel_tolerance {
                break;
            }
            return Err(Error::DecompositionFailed(format!(
                "no convergence after {} steps (missing weight {missing:e})",
                steps.len()
            )));
        }
        match best_single(&table, &candidates, child, config.stall_tolerance) {
            Some(cand) if cand.gain > config.stall_tolerance => {
                table = rotate_table(&table, &cand.word, cand.angle);
                steps.push(PeelStep {
                    word: cand.word,
                    angle: cand.angle,
                    w: cand.profile.w,
                    delta: cand.profile.delta,
                    norm_before: current,
                    norm_after: table.norm_on(child),
                    fallback: false,
                });
            }
            _ if missing <= config.peel_tolerance => break,
            best => {
                let (w, delta) = best.map_or((0.0, 0.0), |b| (b.profile.w, b.profile.delta));
                let Some((d1, t1, second)) = pair_search(&table, &candidates, child, config)
                else {
                    return Err(Error::DecompositionFailed(format!(
                        "greedy step stalled (W = {w:e}, Δ = {delta:e}) and the angle-grid \
                         search found no improving pair; missing weight {missing:e}"
                    )));
                };
                let first = rotate_table(&table, &d1, t1);
                let mid = first.norm_on(child);
                let profile = profile_from_table(&table, &d1, child);
                steps.push(PeelStep {
                    word: d1,
                    angle: t1,
                    w: profile.w,
                    delta: profile.delta,
                    norm_before: current,
                    norm_after: mid,
                    fallback: true,
                });
                table = rotate_table(&first, &second.word, second.angle);
                steps.push(PeelStep {
                    word: second.word,
                    angle: second.angle,
                    w: second.profile.w,
                    delta: second.profile.delta,
                    norm_before: mid,
                    norm_after: table.norm_on(child),
                    fallback: true,
                });
            }
        }
    }
    let projected: HashMap<PauliString, Complex64> =
        child.iter().map(|p| (*p, table.get(p))).collect();
    Ok((ExpansionTable::from_map(table.n_sites(), projected), steps))
}

/// Result of peeling one level of a dense unitary.
#[derive(Debug, Clone)]
pub struct LevelOutcome {
    /// `(D_k, θ_k)` in the order they were right-multiplied as `exp(iθ_k D_k)`.
    pub factors: Vec<(PauliString, f64)>,
    pub residual: CMatrix,
    pub steps: Vec<PeelStep>,
}

/// Right-multiplies `U` by `exp(iθD)` factors until its weight lies in `child`.
pub fn peel_level(
    u: &CMatrix,
    parent: &PauliGroup,
    child: &PauliGroup,
    config: &PeelConfig,
) -> Result<LevelOutcome> {
    let table = expand(u, parent)?;
    let (_, steps) = peel_table(table, parent, child, config)?;
    let mut residual = u.clone();
    for s in &steps {
        residual = rotate_dense(&residual, &s.word, s.angle);
    }
    Ok(LevelOutcome {
        factors: steps.iter().map(|s| (s.word, s.angle)).collect(),
        residual,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::expansion::norm;
    use crate::linalg::{expm_hermitian, max_abs_diff};

    fn w(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn table_rotation_matches_dense() {
        let u = expm_hermitian(&w("XZ").matrix().unwrap(), 0.4)
            * expm_hermitian(&w("YY").matrix().unwrap(), -0.9);
        let g = crate::pauli::group_closure(2, &[w("XZ"), w("YY")]).unwrap();
        let t = expand(&u, &g).unwrap();
        let rotated = rotate_table(&t, &w("YY"), 0.3);
        let dense = expand(&rotate_dense(&u, &w("YY"), 0.3), &g).unwrap();
        for p in g.iter() {
            assert!((rotated.get(p) - dense.get(p)).norm() < 1e-14);
        }
    }

    #[test]
    fn already_in_child_is_untouched() {
        let u = expm_hermitian(&w("ZZ").matrix().unwrap(), 0.4);
        let parent = PauliGroup::from_words(&["II", "ZZ", "XX", "YY"]).unwrap();
        let child = PauliGroup::from_words(&["II", "ZZ"]).unwrap();
        let out = peel_level(&u, &parent, &child, &PeelConfig::default()).unwrap();
        assert!(out.factors.is_empty());
        assert!(max_abs_diff(&out.residual, &u) == 0.0);
    }

    #[test]
    fn single_rotation_peels_exactly() {
        let u = expm_hermitian(&w("XY").matrix().unwrap(), 0.3);
        let parent = PauliGroup::from_words(&["II", "XY"]).unwrap();
        let child = PauliGroup::trivial(2);
        let out = peel_level(&u, &parent, &child, &PeelConfig::default()).unwrap();
        assert_eq!(out.factors.len(), 1);
        assert!((out.factors[0].1 - 0.3).abs() < 1e-14);
        assert!(max_abs_diff(&out.residual, &CMatrix::identity(4, 4)) < 1e-14);
        assert!((norm(&out.residual, &child).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn missing_support_is_a_precondition_error() {
        let u = expm_hermitian(&w("XY").matrix().unwrap(), 0.3);
        let parent = PauliGroup::from_words(&["II", "ZZ"]).unwrap();
        let r = peel_level(&u, &parent, &PauliGroup::trivial(2), &PeelConfig::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
