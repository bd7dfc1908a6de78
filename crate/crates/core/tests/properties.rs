//! Invariants of the distinguishability measures on random states, and Born
//! statistics of sampled measurements.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcoin_core::linalg::{CMatrix, C64};
use qcoin_core::protocol::{block_state, QubitAmplitudes, Representation};
use qcoin_core::quantum::{
    fidelity, measure, probabilities, purify, trace_distance, transition_probability, uhlmann_unitary, DensityMatrix,
    DistinguishabilityReport, Povm, QuantumState, StateVector,
};

/// `G G† / tr(G G†)` for a `dim × rank` matrix `G` with the given entries.
fn density(dim: usize, rank: usize, entries: &[f64]) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, rank, |i, j| {
        let k = 2 * (i * rank + j);
        C64::new(entries[k], entries[k + 1])
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.unscale(tr), vec![dim]).unwrap()
}

fn density_pair() -> impl Strategy<Value = (DensityMatrix, DensityMatrix)> {
    (2usize..=5, 1usize..=5, 1usize..=5).prop_flat_map(|(dim, r0, r1)| {
        let (r0, r1) = (r0.min(dim), r1.min(dim));
        (prop::collection::vec(-1.0..1.0f64, 2 * dim * r0), prop::collection::vec(-1.0..1.0f64, 2 * dim * r1))
            .prop_filter("nonzero matrices", |(a, b)| {
                a.iter().any(|x| x.abs() > 1e-3) && b.iter().any(|x| x.abs() > 1e-3)
            })
            .prop_map(move |(a, b)| (density(dim, r0, &a), density(dim, r1, &b)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn report_relations((rho0, rho1) in density_pair()) {
        let r = DistinguishabilityReport::compute(&rho0, &rho1).unwrap();
        prop_assert!((r.pe - (0.5 - 0.5 * r.k)).abs() < 1e-9);
        prop_assert!((r.trans - r.fid * r.fid).abs() < 1e-9);
        for x in [r.pe, r.k, r.fid, r.trans] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn fuchs_van_de_graaf((rho0, rho1) in density_pair()) {
        let k = trace_distance(&rho0, &rho1).unwrap();
        let f = fidelity(&rho0, &rho1).unwrap();
        prop_assert!(1.0 - f <= k + 1e-9, "1 − F = {}, K = {k}", 1.0 - f);
        prop_assert!(k <= (1.0 - f * f).max(0.0).sqrt() + 1e-9, "K = {k}, F = {f}");
    }

    #[test]
    fn fidelity_is_symmetric((rho0, rho1) in density_pair()) {
        let a = fidelity(&rho0, &rho1).unwrap();
        let b = fidelity(&rho1, &rho0).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn purification_round_trip((rho, _) in density_pair()) {
        let psi = purify(&rho);
        prop_assert_eq!(psi.dims(), &[rho.dim(), rho.dim()][..]);
        let back = psi.reduced(&[0]).unwrap();
        prop_assert!(back.approx_eq(&rho, 1e-9));
    }

    #[test]
    fn uhlmann_attains_the_transition_probability((rho0, rho1) in density_pair()) {
        let (psi0, psi1) = (purify(&rho0), purify(&rho1));
        let r = uhlmann_unitary(&psi0, &psi1, &[1]).unwrap();
        let p = transition_probability(&rho0, &rho1).unwrap();
        prop_assert!((r.u - p).abs() < 1e-8, "u = {}, P = {p}", r.u);
    }
}

/// Samples `povm` on `state` `n` times and checks each outcome's count lies
/// within four standard deviations of its Born expectation.
fn born_frequencies(state: QuantumState, povm: &Povm, n: usize, seed: u64) {
    let probs = probabilities(&state, povm, None).unwrap();
    let mut counts = vec![0usize; povm.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let s = measure(&state, povm, &mut rng).unwrap();
        assert!((s.probability - probs[s.index]).abs() < 1e-12);
        let norm = match &s.post {
            QuantumState::Pure(v) => v.norm(),
            QuantumState::Mixed(r) => r.trace().re,
        };
        assert!((norm - 1.0).abs() < 1e-10);
        counts[s.index] += 1;
    }
    for (k, (&c, &p)) in counts.iter().zip(&probs).enumerate() {
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        let dev = (c as f64 - n as f64 * p).abs();
        assert!(dev <= 4.0 * sigma + 1e-9, "outcome {k}: {c} of {n}, expected p = {p}");
    }
}

#[test]
fn block_test_statistics() {
    // (E₀, E⊥) on Φ(1): p(⊥) = 1 − (c² − s²)^{2n} = 1 − 0.8⁴
    let amps = QubitAmplitudes::from_c2(0.9).unwrap();
    let phi0 = block_state(0, amps, 2, Representation::Full);
    let phi1 = block_state(1, amps, 2, Representation::Full);
    let povm = Povm::check(&phi0, "0").unwrap();
    let probs = probabilities(&QuantumState::Pure(phi1.clone()), &povm, None).unwrap();
    assert!((probs[1] - 0.5904).abs() < 1e-12);
    born_frequencies(QuantumState::Pure(phi1), &povm, 100_000, 1);
}

#[test]
fn computational_basis_statistics() {
    let amps: Vec<f64> = vec![0.1, 0.5, -0.3, 0.7, 0.2, -0.2, 0.0, 0.25];
    let psi =
        StateVector::normalized(amps.iter().map(|&x| C64::new(x, 0.5 * x)).collect::<Vec<_>>().into(), vec![2, 2, 2])
            .unwrap();
    born_frequencies(QuantumState::Pure(psi.clone()), &Povm::computational(8), 100_000, 2);
    born_frequencies(QuantumState::Mixed(psi.reduced(&[0, 2]).unwrap()), &Povm::computational(4), 100_000, 3);
}
