//! Protocol runs checked against exact enumeration and the closed forms.

use qcoin_core::analysis::bias_lower_bound;
use qcoin_core::protocol::{
    attack_distribution, exact_distribution, honest_distribution, run_attack, run_honest, seeded_source, verify_result,
    Attacker, JointState, Outcome, ProtocolParams, Representation, Transcript,
};
use qcoin_core::protocol::{parity_mixture, Party};
use qcoin_core::quantum::transition_probability;

fn params(c2: f64, n: usize, m: usize, l: usize) -> ProtocolParams {
    ProtocolParams::from_c2(c2, n, m, l).unwrap()
}

#[test]
fn honest_protocol_is_fair_and_never_aborts() {
    for p in [params(0.9, 1, 3, 1), params(0.6, 2, 2, 1)] {
        let d = honest_distribution(&p, Representation::Compressed).unwrap();
        assert!((d.zero - 0.5).abs() < 1e-12 && (d.one - 0.5).abs() < 1e-12);
        assert!(d.abort.abs() < 1e-12);
    }
}

#[test]
fn attack_meets_the_closed_form_bound() {
    for (c2, n, m, l) in [
        (0.9, 1, 2, 1),
        (0.75, 1, 2, 1),
        (0.9, 1, 3, 1),
        (0.9, 1, 3, 2),
        (0.6, 1, 3, 1),
        (0.9, 2, 2, 1),
        (0.75, 1, 2, 2),
    ] {
        let p = params(c2, n, m, l);
        for target in 0..2u8 {
            let d = attack_distribution(&p, target, Representation::Compressed).unwrap();
            assert!((d.total() - 1.0).abs() < 1e-9);
            let bound = bias_lower_bound(&p);
            let hit = d.get(Outcome::Bit(target));
            assert!(hit >= bound - 1e-9, "{p:?}, target {target}: {hit} < {bound}");
        }
    }
}

#[test]
fn single_round_attack_by_hand() {
    // one round, l = m = 1: X = target when the register already has the
    // right parity; otherwise the flip succeeds with the squared overlap
    for (c2, n) in [(0.9, 1), (0.75, 2), (0.6, 1)] {
        let p = params(c2, n, 1, 1);
        let overlap = (2.0 * c2 - 1.0f64).powi(n as i32);
        let d = attack_distribution(&p, 0, Representation::Full).unwrap();
        assert!((d.zero - 0.5 * (1.0 + overlap.powi(2))).abs() < 1e-9);
        assert!((d.abort - 0.5 * (1.0 - overlap.powi(2))).abs() < 1e-9);
    }
}

#[test]
fn parity_guess_is_uniform() {
    let p = params(0.8, 1, 3, 1);
    let attacker = Attacker::new(&p, Representation::Compressed).unwrap();
    let d = exact_distribution(|src| {
        let t = attacker.run(0, src, None)?;
        Ok(Outcome::Bit(t.attack.expect("attack record").parity_guess))
    })
    .unwrap();
    assert!((d.zero - 0.5).abs() < 1e-9 && (d.one - 0.5).abs() < 1e-9);
}

#[test]
fn flip_success_is_the_transition_probability() {
    let p = params(0.9, 1, 3, 1);
    let psi = |f: u8| JointState::parity_sector(&p, Representation::Full, p.l, f).unwrap().expanded();
    let (psi0, psi1) = (psi(0), psi(1));
    let qa = p.m - p.l + 1;
    let free: Vec<usize> = (qa..3 * qa).collect();
    let u = qcoin_core::quantum::uhlmann_unitary(&psi0, &psi1, &free).unwrap().u;
    let rho = |b: u8| parity_mixture(Party::A, b, p.l, &p, false).unwrap().rho;
    let expect = transition_probability(&rho(0), &rho(1)).unwrap();
    assert!((u - expect).abs() < 1e-8, "{u} vs {expect}");
}

fn check_transcript(t: &Transcript) {
    let m = t.params.m;
    for (i, row) in t.e.iter().enumerate() {
        for j in 0..m {
            assert_eq!(row[j], t.a[j] ^ t.c[i][j]);
        }
    }
    let checks = t.a_checks.iter().chain(&t.b_checks).chain(&t.alice_return_checks).chain(&t.bob_return_checks);
    let any_abort = checks.flatten().any(|c| c.is_abort());
    assert_eq!(t.result.is_abort(), any_abort);
    assert_eq!(verify_result(t).unwrap(), t.result);
    assert_eq!(&Transcript::from_json_line(&t.to_json_line().unwrap()).unwrap(), t);
}

#[test]
fn transcript_invariants() {
    let p = params(0.8, 2, 3, 2);
    for seed in 0..40 {
        let h = run_honest(&p, seed).unwrap();
        check_transcript(&h);
        let x = h.a.iter().chain(h.b.iter().flatten()).fold(0, |x, y| x ^ y);
        assert_eq!(h.result, Outcome::Bit(x));
        let a = run_attack(&p, 1, seed).unwrap();
        check_transcript(&a);
        // Bob* returned honest qubits, so Alice's last checks always pass
        assert!(a.alice_return_checks.iter().flatten().all(|c| !c.is_abort()));
    }
}

#[test]
fn runs_are_reproducible_from_a_seed() {
    let p = params(0.9, 1, 4, 3);
    let attacker = Attacker::new(&p, Representation::Compressed).unwrap();
    let a = attacker.run(0, &mut seeded_source(99), Some(99)).unwrap();
    assert_eq!(a, run_attack(&p, 0, 99).unwrap());
    assert_eq!(a.to_json_line().unwrap(), run_attack(&p, 0, 99).unwrap().to_json_line().unwrap());
}
