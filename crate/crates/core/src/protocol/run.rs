//! Protocol runs: both parties honest, or honest Alice against Bob*.
//!
//! Every random choice goes through an [`OutcomeSource`] in a fixed order:
//! Alice's bits `a_j`, Bob's bits `b_j` (honest runs only), Alice's `c_ij`,
//! Bob's `d_ij` (both `i`-major), then each measurement as the protocol
//! reaches it.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::joint::{steer_with, JointState};
use super::mixture::parity_mixture_of_length;
use super::params::{block_state, psi, ProtocolParams, Representation};
use super::source::{OutcomeSource, RngSource};
use super::transcript::{AttackRecord, Outcome, RunKind, Transcript, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::quantum::{self, helstrom_pe, Povm, QuantumState, StateVector, UhlmannResult};

/// Seeded generator used by [`run_honest`] and [`run_attack`].
pub fn seeded_source(seed: u64) -> RngSource<ChaCha20Rng> {
    RngSource(ChaCha20Rng::seed_from_u64(seed))
}

/// Block states and their tests, shared by every round of a run.
#[derive(Debug, Clone)]
struct Blocks {
    p: ProtocolParams,
    repr: Representation,
    phi: [StateVector; 2],
    tests: [Povm; 2],
}

impl Blocks {
    fn new(p: &ProtocolParams, repr: Representation) -> Result<Self> {
        p.validate()?;
        let phi = [block_state(0, p.amplitudes(), p.n, repr), block_state(1, p.amplitudes(), p.n, repr)];
        let tests = [Povm::check(&phi[0], "0")?, Povm::check(&phi[1], "1")?];
        Ok(Blocks { p: *p, repr, phi, tests })
    }

    /// The block formed by qubits prepared as `ψ(labels[i])`.
    fn assemble(&self, labels: &[u8]) -> Result<StateVector> {
        match self.repr {
            Representation::Compressed => {
                let first = labels[0];
                if labels.iter().any(|&x| x != first) {
                    return Err(Error::Inconsistent(format!(
                        "block with mixed labels {labels:?} has no compressed form"
                    )));
                }
                Ok(self.phi[first as usize].clone())
            }
            Representation::Full => {
                let amps = self.p.amplitudes();
                let one = |x: u8| psi(x, amps);
                Ok(labels[1..].iter().fold(one(labels[0]), |acc, &x| acc.tensor(&one(x))))
            }
        }
    }

    /// `(E_x, E⊥)` on the block of the given qubits.
    fn test(&self, labels: &[u8], expected: u8, src: &mut dyn OutcomeSource) -> Result<Outcome> {
        let state = QuantumState::Pure(self.assemble(labels)?);
        let probs = quantum::probabilities(&state, &self.tests[expected as usize], None)?;
        Ok(if src.choose(&probs)? == 0 { Outcome::Bit(expected) } else { Outcome::Abort })
    }
}

fn coins(src: &mut dyn OutcomeSource, count: usize) -> Result<Vec<u8>> {
    (0..count).map(|_| src.coin()).collect()
}

fn coin_matrix(src: &mut dyn OutcomeSource, n: usize, m: usize) -> Result<Vec<Vec<u8>>> {
    (0..n).map(|_| coins(src, m)).collect()
}

/// Labels of a pair `ψ(x) ψ(x̄)` after the receiver returns the second qubit
/// on a `0` announcement and the first otherwise: `(kept, returned)`.
fn split_pair(x: u8, announced: u8) -> (u8, u8) {
    let pair = [x, x ^ 1];
    let returned = if announced == 0 { 1 } else { 0 };
    (pair[1 - returned], pair[returned])
}

/// Per-round qubit labels `[j][i]` of one party's pairs after the exchange.
fn exchange(prepared: &[Vec<u8>], announced: &[Vec<u8>], m: usize) -> (Vec<Vec<u8>>, Vec<Vec<u8>>) {
    let n = prepared.len();
    let mut kept = vec![vec![0u8; n]; m];
    let mut returned = vec![vec![0u8; n]; m];
    for i in 0..n {
        for j in 0..m {
            let (k, r) = split_pair(prepared[i][j], announced[i][j]);
            kept[j][i] = k;
            returned[j][i] = r;
        }
    }
    (kept, returned)
}

fn xor_rows(bits: &[u8], mat: &[Vec<u8>]) -> Vec<Vec<u8>> {
    mat.iter().map(|row| row.iter().zip(bits).map(|(x, y)| x ^ y).collect()).collect()
}

fn empty_transcript(kind: RunKind, p: &ProtocolParams, repr: Representation, seed: Option<u64>) -> Transcript {
    let m = p.m;
    Transcript {
        kind,
        params: *p,
        representation: repr,
        seed,
        rng: RNG_ALGORITHM.into(),
        a: Vec::new(),
        b: vec![None; m],
        c: Vec::new(),
        d: Vec::new(),
        e: Vec::new(),
        f: Vec::new(),
        a_checks: vec![None; m],
        b_checks: vec![None; m],
        alice_return_checks: vec![None; m],
        bob_return_checks: vec![None; m],
        attack: None,
        result: Outcome::Abort,
    }
}

fn finish(mut t: Transcript) -> Result<Transcript> {
    t.result = super::transcript::verify_result(&t)?;
    Ok(t)
}

/// Both parties follow the protocol.
pub fn run_honest(p: &ProtocolParams, seed: u64) -> Result<Transcript> {
    run_honest_with(p, Representation::Compressed, &mut seeded_source(seed), Some(seed))
}

pub fn run_honest_with(
    p: &ProtocolParams,
    repr: Representation,
    src: &mut dyn OutcomeSource,
    seed: Option<u64>,
) -> Result<Transcript> {
    let blocks = Blocks::new(p, repr)?;
    let (n, m) = (p.n, p.m);
    let mut t = empty_transcript(RunKind::Honest, p, repr, seed);
    t.a = coins(src, m)?;
    let b = coins(src, m)?;
    t.c = coin_matrix(src, n, m)?;
    t.d = coin_matrix(src, n, m)?;
    t.e = xor_rows(&t.a, &t.c);
    t.f = xor_rows(&b, &t.d);
    let (bob_kept, bob_returned) = exchange(&t.c, &t.e, m);
    let (alice_kept, alice_returned) = exchange(&t.d, &t.f, m);

    for j in 0..m {
        let a_check = blocks.test(&bob_kept[j], t.a[j], src)?;
        t.a_checks[j] = Some(a_check);
        if a_check.is_abort() {
            return finish(t);
        }
        t.b[j] = Some(b[j]);
        let b_check = blocks.test(&alice_kept[j], b[j], src)?;
        t.b_checks[j] = Some(b_check);
        if b_check.is_abort() {
            return finish(t);
        }
    }
    for j in 0..m {
        let alice = blocks.test(&bob_returned[j], t.a[j] ^ 1, src)?;
        t.alice_return_checks[j] = Some(alice);
        if alice.is_abort() {
            return finish(t);
        }
        let bob = blocks.test(&alice_returned[j], b[j] ^ 1, src)?;
        t.bob_return_checks[j] = Some(bob);
        if bob.is_abort() {
            return finish(t);
        }
    }
    finish(t)
}

/// Bob*'s measurements that do not depend on the run, prepared once.
#[derive(Debug, Clone)]
pub struct Attacker {
    blocks: Blocks,
    /// Optimal measurement of the parity of Alice's bits after round `l`;
    /// absent when `l = m`.
    helstrom: Option<Povm>,
    /// Rotation of the register from parity `F` towards parity `F̄`,
    /// indexed by `F`.
    rotations: [UhlmannResult; 2],
}

impl Attacker {
    pub fn new(p: &ProtocolParams, repr: Representation) -> Result<Self> {
        let blocks = Blocks::new(p, repr)?;
        let q = p.m - p.l;
        let helstrom = if q == 0 {
            None
        } else {
            let r0 = parity_mixture_of_length(q, 0, p.amplitudes(), p.n, repr)?;
            let r1 = parity_mixture_of_length(q, 1, p.amplitudes(), p.n, repr)?;
            Some(helstrom_pe(&r0, &r1)?.1)
        };
        let open = JointState::parity_sector(p, repr, p.l, 0)?;
        let rotations = [open.flip_rotation(0)?, open.flip_rotation(1)?];
        Ok(Attacker { blocks, helstrom, rotations })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.blocks.p
    }

    /// `u` for the rotation away from register parity `f`.
    pub fn steer_overlap(&self, f: u8) -> f64 {
        self.rotations[(f & 1) as usize].u
    }

    pub fn run(&self, target: u8, src: &mut dyn OutcomeSource, seed: Option<u64>) -> Result<Transcript> {
        if target > 1 {
            return Err(Error::InvalidArgument(format!("target {target} is not a bit")));
        }
        let blocks = &self.blocks;
        let p = blocks.p;
        let (n, m, l) = (p.n, p.m, p.l);
        let mut t = empty_transcript(RunKind::Attack, &p, blocks.repr, seed);
        t.a = coins(src, m)?;
        t.c = coin_matrix(src, n, m)?;
        t.d = coin_matrix(src, n, m)?;
        t.e = xor_rows(&t.a, &t.c);
        t.f = t.d.clone();
        let (bob_kept, bob_returned) = exchange(&t.c, &t.e, m);

        // rounds before the attack: the register is read out honestly; each
        // round's share of the joint state is independent of the others
        let mut predicted = 0u8;
        for j in 0..l - 1 {
            let a_check = blocks.test(&bob_kept[j], t.a[j], src)?;
            t.a_checks[j] = Some(a_check);
            if a_check.is_abort() {
                return finish(t);
            }
            let mut round = JointState::rounds(&p, blocks.repr, j + 1, j + 1)?;
            let bit = round.measure_register_bit(src)?;
            t.b[j] = Some(bit);
            let passed = round.alice_check(bit, src)?;
            t.b_checks[j] = Some(if passed { Outcome::Bit(bit) } else { Outcome::Abort });
            if !passed {
                return finish(t);
            }
            predicted ^= t.a[j] ^ bit;
        }

        let a_check = blocks.test(&bob_kept[l - 1], t.a[l - 1], src)?;
        t.a_checks[l - 1] = Some(a_check);
        if a_check.is_abort() {
            return finish(t);
        }
        predicted ^= t.a[l - 1];
        let parity_guess = match &self.helstrom {
            None => 0,
            Some(povm) => {
                let later = (l..m).map(|j| blocks.assemble(&bob_kept[j])).collect::<Result<Vec<_>>>()?;
                let state = later[1..].iter().fold(later[0].clone(), |acc, s| acc.tensor(s));
                let probs = quantum::probabilities(&QuantumState::Pure(state), povm, None)?;
                src.choose(&probs)? as u8
            }
        };
        let mut joint = JointState::rounds(&p, blocks.repr, l, m)?;
        let f = joint.measure_register_parity(src)?;
        predicted ^= parity_guess ^ f;
        let want_flip = predicted != target;
        let rotation = want_flip.then(|| &self.rotations[f as usize]);
        let opened = steer_with(&joint, f, want_flip, rotation, src)?;
        joint = opened.post;
        t.attack = Some(AttackRecord {
            target,
            parity_guess,
            register_parity: f,
            predicted,
            steered: want_flip,
            steer_hit: want_flip.then_some(opened.hit),
            steer_overlap: opened.u,
        });

        for (k, &bit) in opened.announced.iter().enumerate() {
            let j = l - 1 + k;
            t.b[j] = Some(bit);
            let passed = joint.alice_check(bit, src)?;
            t.b_checks[j] = Some(if passed { Outcome::Bit(bit) } else { Outcome::Abort });
            if !passed {
                return finish(t);
            }
        }
        for j in 0..m {
            let alice = blocks.test(&bob_returned[j], t.a[j] ^ 1, src)?;
            t.alice_return_checks[j] = Some(alice);
            if alice.is_abort() {
                return finish(t);
            }
        }
        finish(t)
    }
}

/// Honest Alice against Bob* aiming for `target`.
pub fn run_attack(p: &ProtocolParams, target: u8, seed: u64) -> Result<Transcript> {
    Attacker::new(p, Representation::Compressed)?.run(target, &mut seeded_source(seed), Some(seed))
}

pub fn run_attack_with(
    p: &ProtocolParams,
    target: u8,
    repr: Representation,
    src: &mut dyn OutcomeSource,
    seed: Option<u64>,
) -> Result<Transcript> {
    Attacker::new(p, repr)?.run(target, src, seed)
}
