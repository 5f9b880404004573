//! Seeded randomized checks shared by the `selftest` command and the test suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decompose::{decompose, expand_full, reconstruct, Factor, ProductDecomposition};
use crate::error::Result;
use crate::grape::{finite_difference_gradient, objective_and_gradient, NmrSystemSpec, PulseSequence};
use crate::linalg::{c, unitary_fidelity, CMatrix};
use crate::pauli::{group_closure, PauliString};

/// A random non-identity word on `n` sites.
pub fn random_word<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    let full = (1u64 << n) - 1;
    loop {
        let x = rng.random::<u64>() & full;
        let z = rng.random::<u64>() & full;
        if x | z != 0 {
            return PauliString::from_masks(n, x, z).expect("masks fit");
        }
    }
}

/// `exp(−iθ_1 P_1) ⋯ exp(−iθ_k P_k)` with random words and angles in `(−π, π)`.
pub fn random_pauli_product<R: Rng>(rng: &mut R, n: usize, k: usize) -> ProductDecomposition {
    let factors = (0..k)
        .map(|_| Factor {
            word: random_word(rng, n),
            angle: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        })
        .collect();
    ProductDecomposition::new(n, factors, c(1.0, 0.0)).expect("valid factors")
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// Round-trip fidelity of `decompose` on one random product.
pub fn round_trip_case<R: Rng>(rng: &mut R) -> Result<(f64, bool)> {
    let n = rng.random_range(1..=4);
    let k = rng.random_range(1..=6);
    let u = reconstruct(&random_pauli_product(rng, n, k))?;
    let (d, trace) = decompose(&u, None)?;
    Ok((unitary_fidelity(&reconstruct(&d)?, &u), trace.is_monotone(1e-12)))
}

/// Runs `cases` instances of each randomized property.
pub fn run_selftest(seed: u64, cases: usize) -> Result<SelftestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let mut trip = Check { name: "decompose round trip ≥ 1 − 1e−9".into(), cases, failures: 0, worst: 1.0 };
    let mut mono = Check { name: "peel norm monotone".into(), cases, failures: 0, worst: 0.0 };
    for _ in 0..cases {
        match round_trip_case(&mut rng) {
            Ok((f, monotone)) => {
                trip.worst = trip.worst.min(f);
                if f < 1.0 - 1e-9 {
                    trip.failures += 1;
                }
                if !monotone {
                    mono.failures += 1;
                }
            }
            Err(_) => {
                trip.failures += 1;
                trip.worst = 0.0;
            }
        }
    }
    checks.push(trip);
    checks.push(mono);

    let mut parseval = Check { name: "Parseval over the full basis".into(), cases, failures: 0, worst: 0.0 };
    for _ in 0..cases {
        let n = rng.random_range(1..=4);
        let u = reconstruct(&random_pauli_product(&mut rng, n, 4))?;
        let err = (expand_full(&u)?.total_weight() - 1.0).abs();
        parseval.worst = parseval.worst.max(err);
        if err > 1e-10 {
            parseval.failures += 1;
        }
    }
    checks.push(parseval);

    let mut closure = Check { name: "closure size is a power of two".into(), cases, failures: 0, worst: 0.0 };
    for _ in 0..cases {
        let n = rng.random_range(1..=8);
        let seeds: Vec<PauliString> =
            (0..rng.random_range(0..=4)).map(|_| random_word(&mut rng, n)).collect();
        let g = group_closure(n, &seeds)?;
        closure.worst = closure.worst.max(g.len() as f64);
        if !g.len().is_power_of_two() {
            closure.failures += 1;
        }
    }
    checks.push(closure);

    let mut grad = Check { name: "GRAPE gradient vs central differences".into(), cases: cases.min(5), failures: 0, worst: 0.0 };
    for _ in 0..grad.cases {
        let n = rng.random_range(1..=2);
        let spec = NmrSystemSpec::new(
            n,
            (0..n).map(|_| rng.random_range(-200.0..200.0)).collect(),
            symmetric_couplings(&mut rng, n),
            (1..=n).map(|s| vec![s]).collect(),
            vec![1.0; n],
        )?;
        let target: CMatrix = reconstruct(&random_pauli_product(&mut rng, n, 2))?;
        let steps = rng.random_range(2..=6);
        let amplitudes = (0..steps)
            .map(|_| (0..n).map(|_| [rng.random_range(-400.0..400.0), rng.random_range(-400.0..400.0)]).collect())
            .collect();
        let pulse = PulseSequence::new(5e-4, amplitudes)?;
        let (_, g) = objective_and_gradient(&spec, &target, &pulse, &[1.0])?;
        let fd = finite_difference_gradient(&spec, &target, &pulse, &[1.0], 1e-3)?;
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        let rel = g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        grad.worst = grad.worst.max(rel);
        if rel > 1e-5 {
            grad.failures += 1;
        }
    }
    checks.push(grad);

    Ok(SelftestReport { seed, checks })
}

fn symmetric_couplings<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(-100.0..100.0);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}
