use ergokit::classical::{
    classical_relative_entropy, compose_kernels, inhomogeneity_phi, joint_from_kernel, GridDistribution,
    TransitionKernel,
};
use ergokit::ergotropy::{ergotropy_direct, ergotropy_report, optimal_alignment_unitary, passive_energy, passive_state};
use ergokit::geometric::{
    aligned_geometric_state, fs_uniform_sample, geometric_relative_entropy, geometric_state_of, GeometricPoint,
};
use ergokit::io::{geometric_state_from_json, geometric_state_to_json};
use ergokit::quantum::{
    coherence_relative_entropy, dephase, gibbs_state, max_abs_diff, quantum_relative_entropy,
    spectral_relative_entropy, von_neumann_entropy, CMatrix, DensityMatrix, HermitianOperator, C64,
};
use ergokit::random::{
    haar_unitary, random_density, random_density_rank, random_doubly_stochastic, random_hermitian,
    random_probability, stream_rng,
};
use ergokit::workbench::{conditional_thermal_state, sharpened_bound_report, DrivingProtocol};
use itertools::Itertools;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn beta() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.5, 1.0, 2.0])
}

fn state(d: usize, seed: u64, stream: u64) -> DensityMatrix {
    let mut rng = stream_rng(seed, stream);
    let rank = 1 + (seed as usize % d);
    random_density_rank(d, rank, &mut rng)
}

fn hamiltonian(d: usize, seed: u64, stream: u64) -> HermitianOperator {
    random_hermitian(d, &mut stream_rng(seed, stream))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropic_quantities_are_nonnegative(d in 2usize..=8, seed: u64, b in beta()) {
        let rho = state(d, seed, 0);
        let h = hamiltonian(d, seed, 1);
        let eq = gibbs_state(&h, b).unwrap();
        let sigma = random_density(d, &mut stream_rng(seed, 2));
        prop_assert!(coherence_relative_entropy(&rho, &h).unwrap() >= -TOL);
        prop_assert!(quantum_relative_entropy(&rho, &sigma).unwrap() >= -TOL);
        prop_assert!(spectral_relative_entropy(&rho, &sigma).unwrap() >= -TOL);
        prop_assert!(quantum_relative_entropy(&rho, eq.rho()).unwrap() >= -TOL);
    }

    #[test]
    fn relative_entropy_splits_into_coherence_and_populations(d in 2usize..=8, seed: u64, b in beta()) {
        let rho = state(d, seed, 0);
        let h = hamiltonian(d, seed, 1);
        let eq = gibbs_state(&h, b).unwrap();
        let s = quantum_relative_entropy(&rho, eq.rho()).unwrap();
        let c = coherence_relative_entropy(&rho, &h).unwrap();
        let pop = quantum_relative_entropy(&dephase(&rho, &h).unwrap(), eq.rho()).unwrap();
        prop_assert!((s - c - pop).abs() <= TOL);
    }

    #[test]
    fn no_unitary_beats_sorted_pairing(d in 2usize..=5, seed: u64) {
        let rho = state(d, seed, 0);
        let sigma = random_density(d, &mut stream_rng(seed, 1));
        let floor = spectral_relative_entropy(&rho, &sigma).unwrap();
        let mut rng = stream_rng(seed, 2);
        for _ in 0..8 {
            let u = haar_unitary(d, &mut rng);
            let s = quantum_relative_entropy(&rho.conjugated(&u).unwrap(), &sigma).unwrap();
            prop_assert!(s >= floor - TOL);
        }
        let aligned = optimal_alignment_unitary(&rho, &sigma).unwrap().apply(&rho).unwrap();
        prop_assert!((quantum_relative_entropy(&aligned, &sigma).unwrap() - floor).abs() <= TOL);
    }

    #[test]
    fn conjugation_keeps_spectrum_and_entropy(d in 2usize..=8, seed: u64) {
        let rho = state(d, seed, 0);
        let u = haar_unitary(d, &mut stream_rng(seed, 1));
        let moved = rho.conjugated(&u).unwrap();
        prop_assert!((von_neumann_entropy(&moved) - von_neumann_entropy(&rho)).abs() <= 1e-10);
        for (a, b) in moved.eigenvalues().iter().zip(rho.eigenvalues()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn passive_and_gibbs_states_hold_no_ergotropy(d in 2usize..=8, seed: u64, b in beta()) {
        let rho = state(d, seed, 0);
        let h = hamiltonian(d, seed, 1);
        let (passive, u) = passive_state(&rho, &h).unwrap();
        prop_assert!(ergotropy_direct(&passive, &h).unwrap().abs() <= TOL);
        prop_assert!(u.defect() <= 1e-10);
        prop_assert!(max_abs_diff(u.apply(&rho).unwrap().matrix(), passive.matrix()) <= 1e-10);
        let eq = gibbs_state(&h, b).unwrap();
        prop_assert!(ergotropy_direct(eq.rho(), &h).unwrap().abs() <= TOL);
        prop_assert!(ergotropy_direct(&rho, &h).unwrap() >= -TOL);
    }

    #[test]
    fn sorted_pairing_is_the_best_permutation(d in 2usize..=5, seed: u64) {
        let rho = state(d, seed, 0);
        let h = hamiltonian(d, seed, 1);
        let (p, e) = (rho.eigenvalues(), h.energies());
        let best = (0..d)
            .permutations(d)
            .map(|perm| perm.iter().enumerate().map(|(i, &k)| p[k] * e[i]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        prop_assert!((passive_energy(&rho, &h).unwrap() - best).abs() <= 1e-12);
    }

    #[test]
    fn ergotropy_ignores_basis_inside_degenerate_levels(seed: u64) {
        // H = V diag(0, 0, 1, 2) V^dagger built from two bases of the ground level
        let mut rng = stream_rng(seed, 0);
        let v = haar_unitary(4, &mut rng);
        let w = haar_unitary(2, &mut rng);
        let mut rotated = v.clone();
        let block = v.columns(0, 2) * &w;
        rotated.columns_mut(0, 2).copy_from(&block);
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(
            [0.0, 0.0, 1.0, 2.0].iter().map(|&x| C64::from(x)).collect(),
        ));
        let herm = |basis: &CMatrix| {
            let m = basis * &diag * basis.adjoint();
            HermitianOperator::new((&m + m.adjoint()) * C64::from(0.5)).unwrap()
        };
        let rho = random_density(4, &mut rng);
        let a = ergotropy_report(&rho, &herm(&v), 1.0).unwrap();
        let b = ergotropy_report(&rho, &herm(&rotated), 1.0).unwrap();
        prop_assert!((a.total - b.total).abs() <= TOL);
        prop_assert!((a.via_entropies - b.via_entropies).abs() <= TOL);
        prop_assert!((a.dephased_ergotropy - b.dephased_ergotropy).abs() <= TOL);
    }

    #[test]
    fn composed_kernels_stay_doubly_stochastic(n in 2usize..=50, terms in 1usize..=6, seed: u64) {
        let mut rng = stream_rng(seed, 0);
        let a = TransitionKernel::new(random_doubly_stochastic(n, terms, &mut rng)).unwrap();
        let b = TransitionKernel::new(random_doubly_stochastic(n, terms, &mut rng)).unwrap();
        let c = compose_kernels(&a, &b).unwrap();
        for k in 0..n {
            prop_assert!((c.matrix().row(k).sum() - 1.0).abs() <= TOL);
            prop_assert!((c.matrix().column(k).sum() - 1.0).abs() <= TOL);
        }
    }

    #[test]
    fn phi_sums_to_zero(n in 2usize..=60, terms in 1usize..=6, seed: u64) {
        let mut rng = stream_rng(seed, 0);
        let t = TransitionKernel::new(random_doubly_stochastic(n, terms, &mut rng)).unwrap();
        let p = GridDistribution::new(random_probability(n, &mut rng)).unwrap();
        let joint = joint_from_kernel(&p, &t).unwrap();
        prop_assert!(inhomogeneity_phi(&joint, &p).unwrap().iter().sum::<f64>().abs() <= 1e-10);
    }

    #[test]
    fn kl_vanishes_only_on_equal_distributions(n in 2usize..=20, seed: u64) {
        let mut rng = stream_rng(seed, 0);
        let p = GridDistribution::new(random_probability(n, &mut rng)).unwrap();
        let q = GridDistribution::new(random_probability(n, &mut rng)).unwrap();
        prop_assert!(classical_relative_entropy(&p, &p).unwrap().abs() <= 1e-10);
        let gap = p.weights().iter().zip(q.weights()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if gap > 1e-4 {
            prop_assert!(classical_relative_entropy(&p, &q).unwrap() > 1e-10);
        }
    }

    #[test]
    fn geometric_divergence_matches_spectral(d in 2usize..=6, seed: u64) {
        let rho = state(d, seed, 0);
        let sigma = random_density(d, &mut stream_rng(seed, 1));
        let aligned = aligned_geometric_state(&rho, &sigma).unwrap();
        let geo = geometric_relative_entropy(&aligned, &geometric_state_of(&sigma)).unwrap();
        let rotated = optimal_alignment_unitary(&rho, &sigma).unwrap().apply(&rho).unwrap();
        prop_assert!((geo - spectral_relative_entropy(&rho, &sigma).unwrap()).abs() <= TOL);
        prop_assert!((geo - quantum_relative_entropy(&rotated, &sigma).unwrap()).abs() <= TOL);
        prop_assert!(max_abs_diff(&aligned.density_matrix(), rotated.matrix()) <= 1e-10);
    }

    #[test]
    fn geometric_state_json_round_trip(d in 2usize..=6, seed: u64) {
        let g = geometric_state_of(&state(d, seed, 0));
        let text = serde_json::to_string(&geometric_state_to_json(&g)).unwrap();
        let back = geometric_state_from_json(&serde_json::from_str::<Vec<_>>(&text).unwrap()).unwrap();
        for (a, b) in back.weights().iter().zip(g.weights()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
        prop_assert_eq!(back.len(), g.len());
        prop_assert!(max_abs_diff(&back.density_matrix(), &g.density_matrix()) <= 1e-15);
    }

    #[test]
    fn driven_systems_respect_the_sharpened_bound(d in 2usize..=4, seed: u64, b in beta()) {
        let mut rng = stream_rng(seed, 0);
        let (h_a, h_b) = (random_hermitian(d, &mut rng), random_hermitian(d, &mut rng));
        let u = haar_unitary(d, &mut rng);
        let protocol = DrivingProtocol::sudden(h_a, h_b).unwrap();
        let r = sharpened_bound_report(&protocol, &u, b).unwrap();
        prop_assert!(r.violations(TOL).is_empty(), "{:?}", r.violations(TOL));
    }

    #[test]
    fn undriven_conditional_state_is_gibbs(d in 2usize..=6, seed: u64, b in beta()) {
        let h = hamiltonian(d, seed, 0);
        let c = conditional_thermal_state(&h, &h, &CMatrix::identity(d, d), b).unwrap();
        let g = gibbs_state(&h, b).unwrap();
        prop_assert!(max_abs_diff(c.rho.matrix(), g.rho().matrix()) <= 1e-10);
    }
}

fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut worst) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / n - j as f64 / m).abs());
    }
    worst
}

#[test]
fn fubini_study_sampler_is_unitarily_invariant() {
    let d = 3;
    let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 2.5]).unwrap();
    let u = haar_unitary(d, &mut stream_rng(77, 0));
    let points = fs_uniform_sample(d, 100_000, 8).unwrap();
    let before: Vec<f64> = points.iter().map(|p| p.energy(&h)).collect();
    let after: Vec<f64> = points
        .iter()
        .map(|p| GeometricPoint::new(&u * p.amplitudes()).unwrap().energy(&h))
        .collect();
    assert!(ks_distance(before, after) <= 0.01);

    // mean |z_a|^2 = 1/d, variance (d-1)/(d^2 (d+1))
    let sigma = ((d as f64 - 1.0) / ((d * d) as f64 * (d as f64 + 1.0)) / points.len() as f64).sqrt();
    for a in 0..d {
        let mean = points.iter().map(|p| p.amplitudes()[a].norm_sqr()).sum::<f64>() / points.len() as f64;
        assert!((mean - 1.0 / d as f64).abs() <= 3.0 * sigma);
    }
}

#[test]
fn qubit_sampler_moment() {
    let points = fs_uniform_sample(2, 100_000, 1).unwrap();
    let mean = points.iter().map(|p| p.amplitudes()[0].norm_sqr()).sum::<f64>() / points.len() as f64;
    assert!((mean - 0.5).abs() <= 0.005);
}

#[test]
fn sampling_does_not_depend_on_thread_count() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| fs_uniform_sample(2, 3 * ergokit::geometric::SAMPLE_BLOCK + 17, 9).unwrap())
    };
    assert_eq!(run(1), run(3));
}
