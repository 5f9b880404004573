//! Randomized invariants.

use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use spinmirror::chain::{build_hamiltonian, excitation_count, propagator, reverse_bits, ChainSpec};
use spinmirror::decompose::{alternating_word, closed_form, expand_full, reconstruct, Factor, ProductDecomposition};
use spinmirror::grape::{
    fidelity_hs, grape_optimize, objective_and_gradient, propagate, GrapeConfig, InitialPulse,
    NmrSystemSpec, PulseSequence,
};
use spinmirror::linalg::{c, hermitian_eigen, inner, max_abs_diff, trace, CMatrix, ZERO};
use spinmirror::mirror::{fidelity_metric, partial_trace};
use spinmirror::pauli::{group_closure, maximal_subgroup, pauli_mul, PauliString};

fn word(n: usize) -> impl Strategy<Value = PauliString> {
    let full = (1u64 << n) - 1;
    (0..=full, 0..=full).prop_map(move |(x, z)| PauliString::from_masks(n, x, z).unwrap())
}

fn words(n: usize, max: usize) -> impl Strategy<Value = Vec<PauliString>> {
    prop::collection::vec(word(n), 0..=max)
}

fn nonidentity(n: usize) -> impl Strategy<Value = PauliString> {
    word(n).prop_filter("non-identity", |p| !p.is_identity())
}

fn product(max_n: usize, max_k: usize) -> impl Strategy<Value = ProductDecomposition> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((nonidentity(n), -3.0..3.0f64), 1..=max_k).prop_map(move |fs| {
            let factors = fs.into_iter().map(|(word, angle)| Factor { word, angle }).collect();
            ProductDecomposition::new(n, factors, c(1.0, 0.0)).unwrap()
        })
    })
}

fn density_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    let d = 1usize << n;
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d).prop_map(move |v| {
        let a = CMatrix::from_iterator(d, d, v.into_iter().map(|(re, im)| c(re, im)));
        let rho = &a * a.adjoint();
        let t = trace(&rho);
        rho / t
    })
}

fn mirror_propagator(n: usize) -> CMatrix {
    propagator(&build_hamiltonian(&ChainSpec::engineered(n).unwrap()).unwrap(), FRAC_PI_2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn product_phase_matches_matrices((a, b) in (1..=4usize).prop_flat_map(|n| (word(n), word(n)))) {
        let p = pauli_mul(&a, &b).unwrap();
        let expected = a.matrix().unwrap() * b.matrix().unwrap();
        prop_assert!(max_abs_diff(&p.matrix().unwrap(), &expected) < 1e-12);
    }

    #[test]
    fn pauli_basis_is_trace_orthogonal((a, b) in (1..=4usize).prop_flat_map(|n| (word(n), word(n)))) {
        let ip = inner(&a.matrix().unwrap(), &b.matrix().unwrap());
        let expected = if a == b { (1u64 << a.n_sites()) as f64 } else { 0.0 };
        prop_assert!((ip - c(expected, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closure_is_a_power_of_two_containing_seeds((n, seeds) in (1..=6usize).prop_flat_map(|n| (Just(n), words(n, 5)))) {
        let g = group_closure(n, &seeds).unwrap();
        prop_assert!(g.len().is_power_of_two());
        prop_assert!(seeds.iter().all(|s| g.contains(s)));
        prop_assert!(g.contains(&PauliString::identity(n)));
    }

    #[test]
    fn maximal_subgroup_has_half_the_elements((n, seeds) in (1..=6usize).prop_flat_map(|n| (Just(n), prop::collection::vec(nonidentity(n), 1..=5)))) {
        let g = group_closure(n, &seeds).unwrap();
        let h = maximal_subgroup(&g, &[]).unwrap();
        prop_assert_eq!(h.len() * 2, g.len());
        prop_assert!(h.is_subgroup_of(&g));
    }

    #[test]
    fn parseval_and_expansion_round_trip(d in product(4, 5)) {
        let u = reconstruct(&d).unwrap();
        let table = expand_full(&u).unwrap();
        prop_assert!((table.total_weight() - 1.0).abs() < 1e-10);
        let dim = u.nrows();
        let mut sum = CMatrix::from_element(dim, dim, ZERO);
        for (p, coeff) in table.nonzero() {
            sum += p.matrix().unwrap() * coeff;
        }
        prop_assert!(max_abs_diff(&sum, &u) < 1e-10);
    }

    #[test]
    fn decomposition_json_round_trips(d in product(5, 6)) {
        let back = ProductDecomposition::from_json(&d.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn partial_trace_keeps_trace_and_positivity((rho, keep) in (2..=4usize).prop_flat_map(|n| {
        (density_matrix(n), prop::sample::subsequence((1..=n).collect::<Vec<_>>(), 1..n))
    })) {
        let reduced = partial_trace(&rho, &keep).unwrap();
        prop_assert!((trace(&reduced) - c(1.0, 0.0)).norm() < 1e-12);
        let eig = hermitian_eigen(&reduced);
        prop_assert!(eig.values.iter().all(|&l| l > -1e-12));
    }

    #[test]
    fn fidelity_metric_is_bounded((a, b) in (1..=3usize).prop_flat_map(|n| (density_matrix(n), density_matrix(n)))) {
        let f = fidelity_metric(&a, &b).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!((fidelity_metric(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagator_composes(
        n in 2..=5usize,
        couplings in prop::collection::vec(0.1..2.0f64, 4),
        fields in prop::collection::vec(-1.0..1.0f64, 5),
        t in 0.0..2.0f64,
    ) {
        let spec = ChainSpec::new(n, couplings[..n - 1].to_vec(), fields[..n].to_vec()).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let half = propagator(&h, t).unwrap();
        prop_assert!(max_abs_diff(&(&half * &half), &propagator(&h, 2.0 * t).unwrap()) < 1e-10);
        // evolution never mixes excitation-number sectors
        for i in 0..half.nrows() {
            for j in 0..half.ncols() {
                if excitation_count(i) != excitation_count(j) {
                    prop_assert!(half[(i, j)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn engineered_chain_mirrors_basis_states(n in 2..=10usize, seed in any::<u64>()) {
        let u = mirror_propagator(n);
        let j = (seed as usize) & ((1 << n) - 1);
        let r = reverse_bits(j, n);
        prop_assert!((u[(r, j)].norm() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn quarter_turn_factors_commute_and_reorder_freely(n in 2..=8usize, seed in any::<u64>()) {
        let d = closed_form(n).unwrap();
        let quarter: Vec<Factor> = d
            .factors()
            .iter()
            .filter(|f| (f.angle.abs() - std::f64::consts::FRAC_PI_4).abs() < 1e-12)
            .cloned()
            .collect();
        for a in &quarter {
            for b in &quarter {
                prop_assert!(a.word.commutes_with(&b.word));
            }
        }
        let rest: Vec<Factor> = d.factors()[quarter.len()..].to_vec();
        let mut shuffled = quarter.clone();
        // deterministic Fisher–Yates driven by the sampled seed
        let mut state = seed;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        shuffled.extend(rest);
        let reordered = ProductDecomposition::new(n, shuffled, d.global_phase()).unwrap();
        prop_assert!(max_abs_diff(&reconstruct(&reordered).unwrap(), &reconstruct(&d).unwrap()) < 1e-10);
        if n % 2 == 1 {
            let alt = alternating_word(n).unwrap();
            prop_assert!(quarter.iter().all(|f| !f.word.commutes_with(&alt)));
        }
    }

    #[test]
    fn single_rf_scale_is_the_plain_objective(
        amps in prop::collection::vec((-400.0..400.0f64, -400.0..400.0f64), 4),
        target in product(2, 2).prop_filter("two spins", |d| d.n_sites() == 2),
    ) {
        let spec = NmrSystemSpec::new(2, vec![120.0, -80.0], vec![vec![0.0, 30.0], vec![30.0, 0.0]], vec![vec![1], vec![2]], vec![1.0, 1.0]).unwrap();
        let pulse = PulseSequence::new(3e-4, amps.chunks(2).map(|s| s.iter().map(|&(x, y)| [x, y]).collect()).collect()).unwrap();
        let u = reconstruct(&target).unwrap();
        let (value, _) = objective_and_gradient(&spec, &u, &pulse, &[1.0]).unwrap();
        let plain = fidelity_hs(&u, &propagate(&spec, &pulse).unwrap()).unwrap();
        prop_assert!((value - plain).abs() < 1e-12);
    }

    #[test]
    fn grape_trajectory_never_decreases(d in product(1, 3), seed in any::<u64>()) {
        let spec = NmrSystemSpec::free(d.n_sites()).unwrap();
        let config = GrapeConfig {
            max_iterations: 15,
            initial: InitialPulse::Random { seed, fraction: 0.5 },
            ..GrapeConfig::default()
        };
        let r = grape_optimize(&spec, &reconstruct(&d).unwrap(), &config).unwrap();
        prop_assert!(r.trajectory.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(r.trajectory.len(), r.iterations + 1);
        prop_assert!((r.trajectory.last().unwrap() - r.fidelity).abs() < 1e-12);
    }
}
