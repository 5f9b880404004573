use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::product::{Factor, ProductDecomposition};
use crate::error::{Error, Result};
use crate::linalg::c;
use crate::pauli::{Letter, PauliString, MAX_SITES};

/// Word with `left` on site `a`, `right` on site `b` and `Z` strictly between.
fn string_word(n: usize, a: usize, b: usize, left: Letter, right: Letter) -> Result<PauliString> {
    let mut sites = vec![(a, left), (b, right)];
    sites.extend((a + 1..b).map(|s| (s, Letter::Z)));
    PauliString::on_sites(n, &sites)
}

/// `X Y X … I … X Y X`: letters alternate outwards-in from both ends, with
/// the identity on the central site of an odd chain.
pub fn alternating_word(n: usize) -> Result<PauliString> {
    if n.is_multiple_of(2) {
        return Err(Error::Domain("the alternating word needs an odd chain".into()));
    }
    let centre = n.div_ceil(2);
    let sites: Vec<(usize, Letter)> = (1..=n)
        .filter(|&s| s != centre)
        .map(|s| {
            let from_edge = s.min(n + 1 - s) - 1;
            (s, if from_edge % 2 == 0 { Letter::X } else { Letter::Y })
        })
        .collect();
    PauliString::on_sites(n, &sites)
}

/// Exact product form of the engineered chain's propagator at `τ = π/2`.
///
/// Even `N`: for each mirror pair `(k, N+1−k)` the words `X Z…Z X` and
/// `Y Z…Z Y`. Odd `N`: `X Z…Z Y` and `Y Z…Z X` on each pair, followed by the
/// alternating word at a half-angle of `π/2`. All quarter-angle words commute
/// with each other; the alternating word anticommutes with each of them.
/// The overall sign is `+` for `N ≡ 0, 1 (mod 4)` and `−` otherwise (the
/// factors are `exp(±iπ/4 D)`), and the global phase is fixed so that the
/// product equals the propagator exactly.
pub fn closed_form(n: usize) -> Result<ProductDecomposition> {
    if n < 2 {
        return Err(Error::Domain(format!("closed form needs N ≥ 2, got {n}")));
    }
    if n > MAX_SITES {
        return Err(Error::Dimension(format!("N = {n} exceeds {MAX_SITES} sites")));
    }
    let sign = if n % 4 <= 1 { 1.0 } else { -1.0 };
    let quarter = -sign * FRAC_PI_4;
    let mut factors = Vec::with_capacity(n);
    for a in 1..=n / 2 {
        let b = n + 1 - a;
        let pairs = if n.is_multiple_of(2) {
            [(Letter::X, Letter::X), (Letter::Y, Letter::Y)]
        } else {
            [(Letter::X, Letter::Y), (Letter::Y, Letter::X)]
        };
        for (l, r) in pairs {
            factors.push(Factor { word: string_word(n, a, b, l, r)?, angle: quarter });
        }
    }
    let phase = if n.is_multiple_of(2) {
        c(1.0, 0.0)
    } else {
        factors.push(Factor { word: alternating_word(n)?, angle: -sign * FRAC_PI_2 });
        if n % 8 <= 3 {
            c(0.0, -1.0)
        } else {
            c(0.0, 1.0)
        }
    };
    ProductDecomposition::new(n, factors, phase)
}
